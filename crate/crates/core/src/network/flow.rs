use super::CondensedNetwork;
use crate::error::{LrpError, Result};
use std::collections::HashMap;

/// Edge flow with `value(u → v) = -value(v → u)`; stored once per edge in
/// the orientation of `edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub source: usize,
    pub sink: usize,
}

impl FlowField {
    pub fn new(nodes: usize, edges: Vec<(usize, usize, f64)>, source: usize, sink: usize) -> Self {
        FlowField { nodes, edges, source, sink }
    }

    /// Signed flow from `u` to `v`, summed over parallel records.
    pub fn value(&self, u: usize, v: usize) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b, x)| {
                if (a, b) == (u, v) {
                    x
                } else if (a, b) == (v, u) {
                    -x
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Net outflow at every node.
    pub fn divergence(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nodes];
        for &(u, v, x) in &self.edges {
            d[u] += x;
            d[v] -= x;
        }
        d
    }

    /// Net outflow of the source.
    pub fn amount(&self) -> f64 {
        self.divergence()[self.source]
    }

    /// `Σ f²/c` over the edges of `net`.
    pub fn energy(&self, net: &CondensedNetwork) -> f64 {
        let cond: HashMap<(usize, usize), f64> = net.edges.iter().map(|&(u, v, c)| ((u, v), c)).collect();
        self.edges
            .iter()
            .map(|&(u, v, x)| {
                let c = cond.get(&(u.min(v), u.max(v))).copied().unwrap_or(f64::NAN);
                x * x / c
            })
            .sum()
    }

    /// Largest conservation defect over non-terminal nodes.
    pub fn conservation_error(&self) -> f64 {
        self.divergence()
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != self.source && v != self.sink)
            .map(|(_, d)| d.abs())
            .fold(0.0, f64::max)
    }
}

/// The part of a flow carried by the paths whose first entry point is `entry`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowComponent {
    pub entry: usize,
    pub flow: FlowField,
}

impl FlowComponent {
    pub fn amount(&self) -> f64 {
        self.flow.amount()
    }
}

/// Splits a source-to-sink flow into self-avoiding paths and groups them by
/// the first vertex of `entry_points` each path visits.
///
/// Paths are traced greedily from the source along the outgoing edge with the
/// largest remaining flow (ties to the smaller node index). The result has
/// one component per entry point, in the given order.
pub fn flow_decompose(flow: &FlowField, entry_points: &[usize]) -> Result<Vec<FlowComponent>> {
    let amount = flow.amount();
    if !(amount > 0.0) {
        return Err(LrpError::InvalidFlow(format!("flow amount must be positive, got {amount}")));
    }
    let defect = flow.conservation_error();
    if defect > 1e-8 * amount {
        return Err(LrpError::InvalidFlow(format!("flow is not conserved (defect {defect:e})")));
    }
    let n = flow.nodes;
    let dust = 1e-13 * amount;
    // residual arcs: (target, remaining, edge index, orientation)
    let mut out: Vec<Vec<(usize, f64, usize, f64)>> = vec![Vec::new(); n];
    for (k, &(u, v, x)) in flow.edges.iter().enumerate() {
        if x > 0.0 {
            out[u].push((v, x, k, 1.0));
        } else if x < 0.0 {
            out[v].push((u, -x, k, -1.0));
        }
    }
    let mut entry_rank = vec![usize::MAX; n];
    for (r, &z) in entry_points.iter().enumerate() {
        if z < n && entry_rank[z] == usize::MAX {
            entry_rank[z] = r;
        }
    }
    let mut comps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); entry_points.len()];
    let mut on_path = vec![usize::MAX; n];
    let source_out = |out: &Vec<Vec<(usize, f64, usize, f64)>>| -> f64 {
        out[flow.source].iter().map(|a| a.1).filter(|&r| r > dust).sum()
    };
    while source_out(&out) > dust {
        // path as (node, arc index used to leave the previous node)
        let mut path: Vec<(usize, usize)> = vec![(flow.source, usize::MAX)];
        on_path.iter_mut().for_each(|m| *m = usize::MAX);
        on_path[flow.source] = 0;
        let mut cur = flow.source;
        let completed = loop {
            if cur == flow.sink {
                break true;
            }
            let mut best: Option<usize> = None;
            for (ai, a) in out[cur].iter().enumerate() {
                if a.1 <= dust {
                    continue;
                }
                best = match best {
                    None => Some(ai),
                    Some(b) => {
                        let bb = &out[cur][b];
                        if a.1 > bb.1 || (a.1 == bb.1 && a.0 < bb.0) {
                            Some(ai)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let Some(ai) = best else {
                // dead end left by round-off: drop the arc that led here
                let (_, arc) = path.pop().unwrap();
                let prev = path.last().unwrap().0;
                out[prev][arc].1 = 0.0;
                break false;
            };
            let next = out[cur][ai].0;
            if on_path[next] != usize::MAX {
                // cancel the cycle next → … → cur → next
                let start = on_path[next];
                let mut arcs: Vec<(usize, usize)> = Vec::new();
                for w in path[start..].windows(2) {
                    arcs.push((w[0].0, w[1].1));
                }
                arcs.push((cur, ai));
                let b = arcs.iter().map(|&(u, a)| out[u][a].1).fold(f64::INFINITY, f64::min);
                for &(u, a) in &arcs {
                    out[u][a].1 -= b;
                }
                for &(node, _) in &path[start + 1..] {
                    on_path[node] = usize::MAX;
                }
                path.truncate(start + 1);
                cur = next;
                continue;
            }
            on_path[next] = path.len();
            path.push((next, ai));
            cur = next;
        };
        if !completed {
            continue;
        }
        let mut arcs = Vec::with_capacity(path.len());
        for w in path.windows(2) {
            arcs.push((w[0].0, w[1].1));
        }
        let b = arcs.iter().map(|&(u, a)| out[u][a].1).fold(f64::INFINITY, f64::min);
        let rank = path.iter().map(|&(v, _)| entry_rank[v]).find(|&r| r != usize::MAX);
        let Some(rank) = rank else {
            return Err(LrpError::InvalidFlow("a flow path avoids every entry point".into()));
        };
        for &(u, a) in &arcs {
            let arc = &mut out[u][a];
            arc.1 -= b;
            *comps[rank].entry(arc.2).or_insert(0.0) += arc.3 * b;
        }
    }
    Ok(entry_points
        .iter()
        .zip(comps)
        .map(|(&z, m)| {
            let mut edges: Vec<_> = m.into_iter().map(|(k, x)| (flow.edges[k].0, flow.edges[k].1, x)).collect();
            edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            FlowComponent { entry: z, flow: FlowField::new(n, edges, flow.source, flow.sink) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path() {
        let f = FlowField::new(4, vec![(0, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0)], 0, 1);
        let c = flow_decompose(&f, &[2]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].flow.edges, f.edges);
    }

    #[test]
    fn split_by_entry() {
        // source → 2 → sink carries 0.25, source → 3 → sink carries 0.75
        let f = FlowField::new(4, vec![(0, 2, 0.25), (2, 1, 0.25), (0, 3, 0.75), (1, 3, -0.75)], 0, 1);
        let c = flow_decompose(&f, &[2, 3]).unwrap();
        assert!((c[0].amount() - 0.25).abs() < 1e-15);
        assert!((c[1].amount() - 0.75).abs() < 1e-15);
        assert!((c[1].flow.value(3, 1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_leaky_flow() {
        let f = FlowField::new(4, vec![(0, 2, 1.0), (2, 1, 0.5)], 0, 1);
        assert!(matches!(flow_decompose(&f, &[2]), Err(LrpError::InvalidFlow(_))));
    }

    #[test]
    fn rejects_paths_missing_entries() {
        let f = FlowField::new(3, vec![(0, 2, 1.0), (2, 1, 1.0)], 0, 1);
        assert!(flow_decompose(&f, &[]).is_err());
    }

    #[test]
    fn cycles_are_cancelled() {
        let f = FlowField::new(5, vec![(0, 2, 1.0), (2, 3, 1.5), (3, 4, 0.5), (4, 2, 0.5), (3, 1, 1.0)], 0, 1);
        let c = flow_decompose(&f, &[2]).unwrap();
        assert!((c[0].amount() - 1.0).abs() < 1e-15);
    }
}
