use super::{p_edge, truncation_distance, EdgeKey, LrpParams, PairRect, Span};
use crate::error::{invalid, Result};
use crate::rng::{self, Rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Edges from window vertices into one half-infinite region outside the
/// window. The far endpoints are kept, not just counts, so that later
/// rectangle queries (good pairs, inflow sets) can be answered exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRegion {
    pub id: String,
    pub span: Span,
    /// `(window vertex, far endpoint)`, sorted.
    pub edges: Vec<(i64, i64)>,
}

impl BoundaryRegion {
    pub fn multiplicity(&self, v: i64) -> u32 {
        let start = self.edges.partition_point(|e| e.0 < v);
        self.edges[start..].iter().take_while(|e| e.0 == v).count() as u32
    }

    pub fn counts(&self) -> BTreeMap<i64, u32> {
        let mut m = BTreeMap::new();
        for &(v, _) in &self.edges {
            *m.entry(v).or_insert(0) += 1;
        }
        m
    }
}

/// One sampled environment on `[lo, hi]` together with its edges into the
/// two complementary half-lines.
#[derive(Debug, Clone, PartialEq)]
pub struct LrpWindow {
    pub lo: i64,
    pub hi: i64,
    pub beta: f64,
    /// Long edges with both endpoints in the window, sorted.
    pub long_edges: Vec<EdgeKey>,
    pub boundary: Vec<BoundaryRegion>,
    pub excluded: Vec<PairRect>,
    pub seed: u64,
    pub replica_id: u64,
}

pub const LEFT: &str = "left";
pub const RIGHT: &str = "right";

impl LrpWindow {
    pub fn span(&self) -> Span {
        Span::new(self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: i64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn region(&self, id: &str) -> Option<&BoundaryRegion> {
        self.boundary.iter().find(|r| r.id == id)
    }

    pub fn boundary_multiplicity(&self, v: i64, region: &str) -> u32 {
        self.region(region).map_or(0, |r| r.multiplicity(v))
    }

    /// Every known edge as `(u, v)`: nearest-neighbour pairs inside the window,
    /// long edges, then boundary edges (window vertex first).
    pub fn edges(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.lo..self.hi)
            .map(|i| (i, i + 1))
            .chain(self.long_edges.iter().map(|e| (e.lo, e.hi)))
            .chain(self.boundary.iter().flat_map(|r| r.edges.iter().copied()))
    }

    /// Whether a long edge joins `a` and `b`. The answer is exact only when
    /// every pair of the rectangle has an endpoint inside the window, which
    /// holds if one span is finite and contained in it.
    pub fn has_long_edge_between(&self, a: &Span, b: &Span) -> Result<bool> {
        if a.is_empty() || b.is_empty() {
            return Ok(false);
        }
        let w = self.span();
        if !(w.contains_span(a) || w.contains_span(b)) {
            return Err(invalid(format!("window {w} does not determine the edges between {a} and {b}")));
        }
        let rect = PairRect::new(*a, *b);
        Ok(self.edges().any(|(u, v)| (u - v).abs() > 1 && rect.contains(u, v)))
    }

    /// Window vertices with at least one edge into the given region.
    pub fn endpoints_into(&self, region: &str) -> Vec<i64> {
        let mut out: Vec<i64> = self.region(region).map(|r| r.edges.iter().map(|e| e.0).collect()).unwrap_or_default();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(WindowJson::from(self)).expect("window serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: WindowJson = serde_json::from_value(v.clone()).map_err(|e| invalid(format!("bad window json: {e}")))?;
        j.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct WindowJson {
    lo: i64,
    hi: i64,
    beta: f64,
    long_edges: Vec<[i64; 2]>,
    boundary: BTreeMap<String, BTreeMap<i64, u32>>,
    boundary_endpoints: BTreeMap<String, Vec<[i64; 2]>>,
    boundary_spans: BTreeMap<String, Span>,
    excluded: Vec<PairRect>,
    seed: u64,
    replica_id: u64,
}

impl From<&LrpWindow> for WindowJson {
    fn from(w: &LrpWindow) -> Self {
        WindowJson {
            lo: w.lo,
            hi: w.hi,
            beta: w.beta,
            long_edges: w.long_edges.iter().map(|e| [e.lo, e.hi]).collect(),
            boundary: w.boundary.iter().map(|r| (r.id.clone(), r.counts())).collect(),
            boundary_endpoints: w
                .boundary
                .iter()
                .map(|r| (r.id.clone(), r.edges.iter().map(|&(a, b)| [a, b]).collect()))
                .collect(),
            boundary_spans: w.boundary.iter().map(|r| (r.id.clone(), r.span)).collect(),
            excluded: w.excluded.clone(),
            seed: w.seed,
            replica_id: w.replica_id,
        }
    }
}

impl TryFrom<WindowJson> for LrpWindow {
    type Error = crate::error::LrpError;
    fn try_from(j: WindowJson) -> Result<Self> {
        let mut long_edges = Vec::with_capacity(j.long_edges.len());
        for [a, b] in j.long_edges {
            long_edges.push(EdgeKey::new(a, b)?);
        }
        let mut boundary = Vec::new();
        for (id, edges) in j.boundary_endpoints {
            let span = *j.boundary_spans.get(&id).ok_or_else(|| invalid(format!("missing span for region {id}")))?;
            boundary.push(BoundaryRegion { id, span, edges: edges.into_iter().map(|[a, b]| (a, b)).collect() });
        }
        boundary.sort_by(|a, b| region_order(&a.id).cmp(&region_order(&b.id)));
        Ok(LrpWindow {
            lo: j.lo,
            hi: j.hi,
            beta: j.beta,
            long_edges,
            boundary,
            excluded: j.excluded,
            seed: j.seed,
            replica_id: j.replica_id,
        })
    }
}

fn region_order(id: &str) -> u8 {
    match id {
        LEFT => 0,
        RIGHT => 1,
        _ => 2,
    }
}

fn excluded_pair(excluded: &[PairRect], u: i64, v: i64) -> bool {
    (u - v).abs() > 1 && excluded.iter().any(|r| r.contains(u, v))
}

/// Samples the window `[lo, hi]` and its edges into `(-∞, lo-1]` and
/// `[hi+1, ∞)`, using the replica stream of `params.seed`.
pub fn sample_window(
    params: &LrpParams,
    lo: i64,
    hi: i64,
    excluded: &[PairRect],
    replica_id: u64,
) -> Result<LrpWindow> {
    let mut rng = rng::stream(params.seed, rng::domain::WINDOW, replica_id);
    sample_window_with_rng(params, lo, hi, excluded, replica_id, &mut rng)
}

pub fn sample_window_with_rng(
    params: &LrpParams,
    lo: i64,
    hi: i64,
    excluded: &[PairRect],
    replica_id: u64,
    rng: &mut Rng,
) -> Result<LrpWindow> {
    params.validate()?;
    if hi <= lo {
        return Err(invalid(format!("window needs hi > lo, got [{lo},{hi}]")));
    }
    let beta = params.beta;
    let n = hi - lo;
    let mut long_edges = Vec::new();
    for d in 2..=n {
        let candidates = (n - d + 1) as u64;
        let p = p_edge(beta, d as u64);
        let mut idx = geometric_skip(p, rng);
        while idx < candidates {
            let i = lo + idx as i64;
            if !excluded_pair(excluded, i, i + d) {
                long_edges.push(EdgeKey { lo: i, hi: i + d });
            }
            idx = idx.saturating_add(1).saturating_add(geometric_skip(p, rng));
        }
    }
    long_edges.sort_unstable();

    let left = Span::up_to(lo - 1);
    let right = Span::from(hi + 1);
    let mut left_edges = Vec::new();
    let mut right_edges = Vec::new();
    for v in lo..=hi {
        for u in sample_boundary_edges(params, v, &left, rng)? {
            if !excluded_pair(excluded, v, u) {
                left_edges.push((v, u));
            }
        }
        for u in sample_boundary_edges(params, v, &right, rng)? {
            if !excluded_pair(excluded, v, u) {
                right_edges.push((v, u));
            }
        }
    }
    Ok(LrpWindow {
        lo,
        hi,
        beta,
        long_edges,
        boundary: vec![
            BoundaryRegion { id: LEFT.into(), span: left, edges: left_edges },
            BoundaryRegion { id: RIGHT.into(), span: right, edges: right_edges },
        ],
        excluded: excluded.to_vec(),
        seed: params.seed,
        replica_id,
    })
}

/// Far endpoints `u ∈ region` of edges `⟨v, u⟩`, sorted by distance.
///
/// Scans outward by thinning: with a proposal rate `q` no smaller than every
/// remaining `p_d`, jump a geometric number of sites, accept with `p_d / q`,
/// then tighten `q`. The scan stops once the residual mass past the current
/// distance is below `truncation_eps`.
pub fn sample_boundary_edges(params: &LrpParams, v: i64, region: &Span, rng: &mut Rng) -> Result<Vec<i64>> {
    let (d0, sign) = match (region.lo, region.hi) {
        (None, Some(h)) if v > h => ((v - h) as u64, -1i64),
        (Some(l), None) if v < l => ((l - v) as u64, 1i64),
        _ => return Err(invalid(format!("region {region} must be a half-line not containing {v}"))),
    };
    let beta = params.beta;
    let dmax = truncation_distance(beta, params.truncation_eps).max(d0);
    let mut out = Vec::new();
    let mut d = d0;
    if d == 1 {
        out.push(v + sign);
        d = 2;
    }
    let mut q = p_edge(beta, d);
    while d <= dmax {
        let skip = geometric_skip(q, rng);
        d = match d.checked_add(skip) {
            Some(x) if x <= dmax => x,
            _ => break,
        };
        let p = p_edge(beta, d);
        if rng.random::<f64>() * q < p {
            out.push(v + sign * d as i64);
        }
        d += 1;
        q = p_edge(beta, d);
    }
    Ok(out)
}

/// Failures before the first success of Bernoulli(`p`) trials, by inversion.
/// Stays exact for `p` far below `f64::EPSILON`, where `1 - p` rounds to 1.
pub fn geometric_skip(p: f64, rng: &mut Rng) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let x = (u.ln() / (-p).ln_1p()).floor();
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

/// Number of edges between `v` and the half-line `region`.
pub fn sample_boundary_multiplicity(params: &LrpParams, v: i64, region: &Span, rng: &mut Rng) -> Result<u32> {
    Ok(sample_boundary_edges(params, v, region, rng)?.len() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64) -> LrpParams {
        LrpParams::new(beta, 11).unwrap()
    }

    #[test]
    fn geometric_skip_mean() {
        let mut r = rng::stream(2, 1, 0);
        let p = 0.05;
        let n = 50_000;
        let mean = (0..n).map(|_| geometric_skip(p, &mut r) as f64).sum::<f64>() / n as f64;
        let want = (1.0 - p) / p;
        assert!((mean - want).abs() < 0.03 * want, "{mean}");
        assert!(geometric_skip(1e-30, &mut r) > 1 << 40);
    }

    #[test]
    fn full_exclusion_leaves_no_long_edges() {
        let w = sample_window(&params(2.0), 0, 50, &[PairRect::new(Span::new(0, 50), Span::new(0, 50))], 0).unwrap();
        assert!(w.long_edges.is_empty());
        assert_eq!(w.edges().filter(|&(u, v)| (u - v).abs() == 1).count() >= 50, true);
    }

    #[test]
    fn window_is_reproducible() {
        let a = sample_window(&params(1.0), -20, 20, &[], 5).unwrap();
        let b = sample_window(&params(1.0), -20, 20, &[], 5).unwrap();
        assert_eq!(a, b);
        let c = sample_window(&params(1.0), -20, 20, &[], 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn nearest_neighbour_boundary_edge_is_forced() {
        let p = params(0.01);
        let mut rng = rng::stream(1, 99, 0);
        for _ in 0..50 {
            let e = sample_boundary_edges(&p, 1, &Span::up_to(0), &mut rng).unwrap();
            assert_eq!(e[0], 0);
        }
    }

    #[test]
    fn boundary_rejects_bad_region() {
        let p = params(1.0);
        let mut rng = rng::stream(1, 99, 0);
        assert!(sample_boundary_edges(&p, 0, &Span::up_to(0), &mut rng).is_err());
        assert!(sample_boundary_edges(&p, 0, &Span::new(3, 5), &mut rng).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = sample_window(&params(1.0), 0, 30, &[PairRect::new(Span::new(0, 3), Span::from(20))], 2).unwrap();
        let j = w.to_json();
        assert!(j.get("boundary").unwrap().get("left").is_some());
        let back = LrpWindow::from_json(&j).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn long_edge_query_needs_coverage() {
        let w = sample_window(&params(1.0), 0, 30, &[], 2).unwrap();
        assert!(w.has_long_edge_between(&Span::up_to(-1), &Span::from(40)).is_err());
        assert!(w.has_long_edge_between(&Span::new(0, 5), &Span::from(40)).is_ok());
    }

    #[test]
    fn exclusion_applies_to_boundary_edges() {
        let ex = [PairRect::new(Span::new(0, 30), Span::from(31))];
        for r in 0..20 {
            let w = sample_window(&params(3.0), 0, 30, &ex, r).unwrap();
            assert_eq!(w.region(RIGHT).unwrap().edges, vec![(30, 31)]);
            assert!(!w.region(LEFT).unwrap().edges.is_empty());
        }
    }
}
