//! Condensed electrical networks built from sampled windows, effective
//! resistances, unit flows and their path decompositions.

mod cg;
mod cholesky;
mod dense;
mod flow;
mod hat;
mod solve;

pub use cholesky::{nested_dissection, Cholesky, SymmetricMatrix};
pub use dense::brute_force_resistance;
pub use flow::{flow_decompose, FlowComponent, FlowField};
pub use hat::{hat_resistance, statistic_network, HatSide, Statistic};
pub use solve::{effective_resistance, effective_resistance_with, SolverOptions};

use crate::error::{invalid, Result};
use crate::model::{LrpWindow, PairRect, Span};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Node index of the source supernode.
pub const SOURCE: usize = 0;
/// Node index of the sink supernode.
pub const SINK: usize = 1;

/// A resistance value; infinity marks disconnected terminals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resistance {
    Finite(f64),
    Infinite,
}

impl Resistance {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Resistance::Finite(x) => x,
            Resistance::Infinite => f64::INFINITY,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x.is_infinite() {
            Resistance::Infinite
        } else {
            Resistance::Finite(x)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Resistance::Finite(_))
    }

    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_f64().total_cmp(&other.as_f64())
    }
}

impl std::fmt::Display for Resistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Resistance::Finite(x) => write!(f, "{x}"),
            Resistance::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Resistance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resistance::Finite(x) => s.serialize_f64(*x),
            Resistance::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Resistance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Resistance::Finite(x)),
            Raw::Str(s) if s == "inf" => Ok(Resistance::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad resistance {s:?}"))),
        }
    }
}

/// Output of a resistance solve.
#[derive(Debug, Clone, Serialize)]
pub struct ResistanceResult {
    pub value: Resistance,
    #[serde(skip)]
    pub flow: Option<FlowField>,
    /// Potentials of the unit flow (sink at 0), indexed by node.
    #[serde(skip)]
    pub potentials: Option<Vec<f64>>,
    pub iterations: usize,
    pub residual: f64,
}

/// Weighted multigraph with two terminal supernodes.
///
/// Node 0 is the source, node 1 the sink, the rest are interior vertices.
/// Parallel edges are merged into one conductance.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedNetwork {
    /// Integer vertex behind each interior node; `None` for the terminals.
    pub labels: Vec<Option<i64>>,
    /// `(u, v, conductance)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize, f64)>,
    pub forbidden: Vec<PairRect>,
    /// Number of sampled edges removed by `forbidden` or the direct-edge ban.
    pub removed: usize,
}

impl CondensedNetwork {
    /// Network on `nodes` nodes (at least the two terminals) from an edge
    /// list; parallel edges are summed, terminal self-loops dropped.
    pub fn from_edges(nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if nodes < 2 {
            return Err(invalid("a network needs both terminals"));
        }
        let mut agg: HashMap<(usize, usize), f64> = HashMap::new();
        for &(u, v, c) in edges {
            if u >= nodes || v >= nodes {
                return Err(invalid(format!("edge ({u},{v}) out of range")));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid(format!("conductance must be positive, got {c}")));
            }
            if u == v {
                continue;
            }
            *agg.entry((u.min(v), u.max(v))).or_insert(0.0) += c;
        }
        let mut edges: Vec<_> = agg.into_iter().map(|((u, v), c)| (u, v, c)).collect();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut labels = vec![None, None];
        labels.extend((2..nodes).map(|_| None));
        Ok(CondensedNetwork { labels, edges, forbidden: Vec::new(), removed: 0 })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn node_of(&self, label: i64) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(label))
    }

    pub fn conductance(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.iter().filter(|e| e.0 == a && e.1 == b).map(|e| e.2).sum()
    }

    /// Copy with the edge `(u, v)` removed or its conductance replaced.
    pub fn with_conductance(&self, u: usize, v: usize, c: f64) -> Self {
        let (a, b) = (u.min(v), u.max(v));
        let mut out = self.clone();
        out.edges.retain(|e| !(e.0 == a && e.1 == b));
        if c > 0.0 && a != b {
            out.edges.push((a, b, c));
            out.edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        }
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(u, v, c) in &self.edges {
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        adj
    }

    /// Whether the two terminals are joined by a path.
    pub fn terminals_connected(&self) -> bool {
        let reach = self.reachable_from(SOURCE);
        reach[SINK]
    }

    pub(crate) fn reachable_from(&self, start: usize) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// How window vertices are assigned to terminals when condensing.
#[derive(Debug, Clone, PartialEq)]
pub struct Terminals {
    pub source: Vec<Span>,
    pub sink: Vec<Span>,
    /// Vertices kept as interior nodes; must lie inside the window. Vertices
    /// in none of the three classes are dropped with their edges.
    pub interior: Span,
    /// Remove every edge joining source and sink directly.
    pub forbid_direct: bool,
    pub forbidden: Vec<PairRect>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Source,
    Sink,
    Interior(usize),
    Dropped,
}

impl Terminals {
    fn classify(&self, v: i64, first_interior: i64) -> Class {
        if self.source.iter().any(|s| s.contains(v)) {
            Class::Source
        } else if self.sink.iter().any(|s| s.contains(v)) {
            Class::Sink
        } else if self.interior.contains(v) {
            Class::Interior(2 + (v - first_interior) as usize)
        } else {
            Class::Dropped
        }
    }
}

/// Builds the condensed network of `window` for the given terminal layout.
///
/// Half-line terminals become supernodes; parallel edges into them add up;
/// edges inside one terminal are shorted away.
pub fn condense(window: &LrpWindow, t: &Terminals) -> Result<CondensedNetwork> {
    for s in &t.source {
        for k in &t.sink {
            if s.intersects(k) {
                return Err(invalid(format!("source {s} and sink {k} overlap")));
            }
        }
    }
    if t.source.iter().all(|s| s.is_empty()) || t.sink.iter().all(|s| s.is_empty()) {
        return Err(invalid("empty terminal set"));
    }
    let w = window.span();
    let interior = t.interior;
    if !interior.is_finite() || !w.contains_span(&interior) {
        return Err(invalid(format!("interior {interior} must lie inside window {w}")));
    }
    if !t.forbid_direct {
        let inside = |set: &[Span]| set.iter().all(|s| s.is_empty() || w.contains_span(s));
        if !inside(&t.source) && !inside(&t.sink) {
            return Err(invalid("direct source-sink edges are allowed but neither terminal lies inside the window"));
        }
    }
    let (ilo, ihi) = if interior.is_empty() { (0, -1) } else { (interior.lo.unwrap(), interior.hi.unwrap()) };
    let mut labels = vec![None, None];
    labels.extend((ilo..=ihi).map(Some));
    let mut agg: HashMap<(usize, usize), f64> = HashMap::new();
    let mut removed = 0;
    for (u, v) in window.edges() {
        let (cu, cv) = (t.classify(u, ilo), t.classify(v, ilo));
        let (a, b) = match (cu, cv) {
            (Class::Dropped, _) | (_, Class::Dropped) => continue,
            (Class::Source, Class::Source) | (Class::Sink, Class::Sink) => continue,
            _ => (node(cu), node(cv)),
        };
        let direct = matches!((cu, cv), (Class::Source, Class::Sink) | (Class::Sink, Class::Source));
        if (direct && t.forbid_direct) || t.forbidden.iter().any(|r| r.contains(u, v)) {
            removed += 1;
            continue;
        }
        *agg.entry((a.min(b), a.max(b))).or_insert(0.0) += 1.0;
    }
    let mut edges: Vec<_> = agg.into_iter().map(|((u, v), c)| (u, v, c)).collect();
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(CondensedNetwork { labels, edges, forbidden: t.forbidden.clone(), removed })
}

fn node(c: Class) -> usize {
    match c {
        Class::Source => SOURCE,
        Class::Sink => SINK,
        Class::Interior(i) => i,
        Class::Dropped => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_window, LrpParams};

    fn empty_window(lo: i64, hi: i64) -> LrpWindow {
        let p = LrpParams::new(1.0, 0).unwrap();
        let full = [PairRect::new(Span::all(), Span::all())];
        sample_window(&p, lo, hi, &full, 0).unwrap()
    }

    #[test]
    fn empty_window_condenses_to_a_path() {
        let w = empty_window(0, 10);
        let t = Terminals {
            source: vec![Span::point(0)],
            sink: vec![Span::point(6)],
            interior: Span::new(1, 5),
            forbid_direct: false,
            forbidden: vec![],
        };
        let net = condense(&w, &t).unwrap();
        assert_eq!(net.edges.len(), 6);
        assert!(net.edges.iter().all(|e| e.2 == 1.0));
        let r = effective_resistance(&net).unwrap();
        assert!((r.value.as_f64() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_terminals_rejected() {
        let w = empty_window(0, 10);
        let t = Terminals {
            source: vec![Span::new(0, 3)],
            sink: vec![Span::new(3, 4)],
            interior: Span::new(5, 6),
            forbid_direct: false,
            forbidden: vec![],
        };
        assert!(condense(&w, &t).is_err());
    }

    #[test]
    fn parallel_boundary_edges_add() {
        let mut w = empty_window(0, 5);
        let right = w.boundary.iter_mut().find(|r| r.id == "right").unwrap();
        right.edges = vec![(5, 6), (5, 9), (3, 12)];
        let t = Terminals {
            source: vec![Span::point(0)],
            sink: vec![Span::from(6)],
            interior: Span::new(1, 5),
            forbid_direct: false,
            forbidden: vec![],
        };
        let net = condense(&w, &t).unwrap();
        let n5 = net.node_of(5).unwrap();
        assert_eq!(net.conductance(n5, SINK), 2.0);
    }

    #[test]
    fn forbidden_rectangle_removes_direct_edges() {
        let mut w = empty_window(-3, 3);
        w.long_edges.push(crate::model::EdgeKey::new(-2, 3).unwrap());
        let t = Terminals {
            source: vec![Span::up_to(0)],
            sink: vec![Span::point(3)],
            interior: Span::new(1, 2),
            forbid_direct: false,
            forbidden: vec![PairRect::new(Span::up_to(0), Span::from(3))],
        };
        let net = condense(&w, &t).unwrap();
        assert_eq!(net.conductance(SOURCE, SINK), 0.0);
        assert_eq!(net.removed, 1);
    }

    #[test]
    fn resistance_json() {
        assert_eq!(serde_json::to_string(&Resistance::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Resistance::Finite(1.5)).unwrap(), "1.5");
        let r: Resistance = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(r, Resistance::Infinite);
    }
}
