//! The β-LRP edge law on ℤ: exact connection probabilities, rectangle
//! no-edge probabilities and exact samplers.

mod cells;
mod window;

pub use cells::{sample_rect_points, RectPoint};
pub use window::{
    geometric_skip, sample_boundary_edges, sample_boundary_multiplicity, sample_window, sample_window_with_rng,
    BoundaryRegion, LrpWindow, LEFT, RIGHT,
};

use crate::error::{invalid, LrpError, Result};
use serde::{Deserialize, Serialize};

/// Model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrpParams {
    pub beta: f64,
    pub seed: u64,
    pub truncation_eps: f64,
}

impl LrpParams {
    pub const DEFAULT_EPS: f64 = 1e-12;

    pub fn new(beta: f64, seed: u64) -> Result<Self> {
        Self::with_eps(beta, seed, Self::DEFAULT_EPS)
    }

    pub fn with_eps(beta: f64, seed: u64, truncation_eps: f64) -> Result<Self> {
        let p = LrpParams { beta, seed, truncation_eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta must be positive and finite, got {}", self.beta)));
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps <= 1e-6) {
            return Err(invalid(format!("truncation_eps must lie in (0, 1e-6], got {}", self.truncation_eps)));
        }
        Ok(())
    }
}

/// Probability that two vertices at distance `d` are joined.
pub fn edge_probability(params: &LrpParams, d: i64) -> Result<f64> {
    if d < 1 {
        return Err(invalid(format!("distance must be at least 1, got {d}")));
    }
    Ok(p_edge(params.beta, d as u64))
}

/// `1 - (1 - 1/d²)^β`, with `p_1 = 1`. Written with `expm1`/`ln_1p` so that
/// tiny probabilities at large distances keep full relative precision.
#[inline]
pub fn p_edge(beta: f64, d: u64) -> f64 {
    if d <= 1 {
        return 1.0;
    }
    let x = 1.0 / (d as f64 * d as f64);
    -(beta * (-x).ln_1p()).exp_m1()
}

/// `∫_{a1}^{a2} ∫_{b1}^{b2} (u - v)^{-2} dv du` for two disjoint intervals.
///
/// Bounds may be infinite on the outer sides. The intervals may be given in
/// either order.
pub fn rect_integral(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<f64> {
    if a1.is_nan() || a2.is_nan() || b1.is_nan() || b2.is_nan() {
        return Err(invalid("NaN interval bound"));
    }
    if a1 > a2 || b1 > b2 {
        return Err(invalid(format!("malformed intervals [{a1},{a2}] x [{b1},{b2}]")));
    }
    // put the left interval first
    let (a1, a2, b1, b2) = if a2 <= b1 {
        (a1, a2, b1, b2)
    } else if b2 <= a1 {
        (b1, b2, a1, a2)
    } else {
        return Err(invalid(format!("intervals [{a1},{a2}] and [{b1},{b2}] overlap")));
    };
    let wa = a2 - a1;
    let wb = b2 - b1;
    if wa == 0.0 || wb == 0.0 {
        return Ok(0.0);
    }
    if a1 == f64::NEG_INFINITY && b2 == f64::INFINITY {
        return Err(LrpError::DivergentIntegral("both intervals are unbounded on their outer sides".into()));
    }
    let gap = b1 - a2;
    if gap <= 0.0 {
        return Err(LrpError::DivergentIntegral(format!("intervals touch at {a2}; the kernel mass is infinite")));
    }
    if !a2.is_finite() || !b1.is_finite() {
        return Err(invalid("inner interval bounds must be finite"));
    }
    let j = if b2 == f64::INFINITY {
        (wa / gap).ln_1p()
    } else if a1 == f64::NEG_INFINITY {
        (wb / gap).ln_1p()
    } else {
        (wa / gap * (wb / (b2 - a1))).ln_1p()
    };
    Ok(j)
}

/// Probability that no point of the β-weighted kernel falls in the rectangle,
/// i.e. `exp{-β ∬ (u-v)^{-2}}`.
pub fn rectangle_no_edge_probability(params: &LrpParams, a1: f64, a2: f64, b1: f64, b2: f64) -> Result<f64> {
    Ok((-params.beta * rect_integral(a1, a2, b1, b2)?).exp())
}

/// Integer interval; `None` marks an unbounded side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Span {
    pub const fn new(lo: i64, hi: i64) -> Self {
        Span { lo: Some(lo), hi: Some(hi) }
    }
    pub const fn point(v: i64) -> Self {
        Span::new(v, v)
    }
    /// `(-∞, hi]`
    pub const fn up_to(hi: i64) -> Self {
        Span { lo: None, hi: Some(hi) }
    }
    /// `[lo, ∞)`
    pub const fn from(lo: i64) -> Self {
        Span { lo: Some(lo), hi: None }
    }
    pub const fn all() -> Self {
        Span { lo: None, hi: None }
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(a), Some(b)) if a > b)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo.is_none_or(|a| v >= a) && self.hi.is_none_or(|b| v <= b)
    }

    pub fn contains_span(&self, other: &Span) -> bool {
        if other.is_empty() {
            return true;
        }
        let lo_ok = match (self.lo, other.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b >= a,
        };
        let hi_ok = match (self.hi, other.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b <= a,
        };
        lo_ok && hi_ok
    }

    pub fn len(&self) -> Option<u64> {
        match (self.lo, self.hi) {
            (Some(a), Some(b)) if a > b => Some(0),
            (Some(a), Some(b)) => Some((b - a) as u64 + 1),
            _ => None,
        }
    }

    /// Continuous image `[lo, hi + 1)` used by the unit-square kernel.
    pub fn continuous(&self) -> (f64, f64) {
        let lo = self.lo.map_or(f64::NEG_INFINITY, |a| a as f64);
        let hi = self.hi.map_or(f64::INFINITY, |b| b as f64 + 1.0);
        (lo, hi)
    }

    pub fn intersect(&self, other: &Span) -> Span {
        let lo = match (self.lo, other.lo) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.max(b)),
        };
        let hi = match (self.hi, other.hi) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        Span { lo, hi }
    }

    pub fn intersects(&self, other: &Span) -> bool {
        !self.intersect(other).is_empty()
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.lo, self.hi) {
            (Some(a), Some(b)) => write!(f, "[{a},{b}]"),
            (None, Some(b)) => write!(f, "(-inf,{b}]"),
            (Some(a), None) => write!(f, "[{a},+inf)"),
            (None, None) => write!(f, "(-inf,+inf)"),
        }
    }
}

/// Unordered edge, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub lo: i64,
    pub hi: i64,
}

impl EdgeKey {
    pub fn new(i: i64, j: i64) -> Result<Self> {
        if i == j {
            return Err(invalid(format!("self-loop at {i}")));
        }
        Ok(if i < j { EdgeKey { lo: i, hi: j } } else { EdgeKey { lo: j, hi: i } })
    }
    pub fn len(&self) -> i64 {
        self.hi - self.lo
    }
    pub fn is_long(&self) -> bool {
        self.len() > 1
    }
}

/// The set of vertex pairs `{u, v}` with `u ∈ a`, `v ∈ b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRect {
    pub a: Span,
    pub b: Span,
}

impl PairRect {
    pub fn new(a: Span, b: Span) -> Self {
        PairRect { a, b }
    }

    pub fn contains(&self, u: i64, v: i64) -> bool {
        (self.a.contains(u) && self.b.contains(v)) || (self.a.contains(v) && self.b.contains(u))
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty() || self.b.is_empty()
    }

    /// `∬` over the long-edge cells of the rectangle. Spans must be disjoint;
    /// an adjacent nearest-neighbour cell is left out, since `p_1 = 1` and
    /// that pair is never a long edge.
    pub fn long_edge_integral(&self) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        let (a, b) = self.ordered()?;
        let (ah, bl) = (a.hi.unwrap(), b.lo.unwrap());
        if bl - ah == 1 {
            let mut total = 0.0;
            let a_rest = Span { lo: a.lo, hi: Some(ah - 1) };
            if !a_rest.is_empty() {
                total += PairRect::new(a_rest, b).long_edge_integral()?;
            }
            let b_rest = Span { lo: Some(bl + 1), hi: b.hi };
            if !b_rest.is_empty() {
                total += PairRect::new(Span::point(ah), b_rest).long_edge_integral()?;
            }
            return Ok(total);
        }
        let (a1, a2) = a.continuous();
        let (b1, b2) = b.continuous();
        rect_integral(a1, a2, b1, b2)
    }

    /// Probability that no long edge joins `a` and `b`.
    pub fn no_edge_probability(&self, beta: f64) -> Result<f64> {
        Ok((-beta * self.long_edge_integral()?).exp())
    }

    /// The two spans ordered left to right; errors if they overlap.
    fn ordered(&self) -> Result<(Span, Span)> {
        let (a, b) = (self.a, self.b);
        if let (Some(ah), Some(bl)) = (a.hi, b.lo) {
            if ah < bl {
                return Ok((a, b));
            }
        }
        if let (Some(bh), Some(al)) = (b.hi, a.lo) {
            if bh < al {
                return Ok((b, a));
            }
        }
        Err(invalid(format!("spans {} and {} overlap", self.a, self.b)))
    }
}

/// Expected number of points of `(2^{i-1}, 2^i]` joined to `(-∞, 0]`.
pub fn mu_layer(beta: f64, i: u32) -> f64 {
    if i == 0 {
        return 0.0;
    }
    let f = |v: f64| -(beta * (-1.0 / v).ln_1p()).exp_m1();
    let lo = 1u64 << (i - 1);
    let hi = 1u64 << i;
    if i <= 24 {
        // v = 1 has probability 1 but only appears for i = 0
        return ((lo + 1)..=hi).map(|v| f(v as f64)).sum();
    }
    // Euler-Maclaurin: integral by composite Simpson on log v, plus endpoint
    // corrections; f is smooth and its derivatives decay like v^{-2}.
    let (x0, x1) = ((lo as f64 + 1.0).ln(), (hi as f64).ln());
    let panels = 2000;
    let h = (x1 - x0) / panels as f64;
    let g = |x: f64| f(x.exp()) * x.exp();
    let mut s = g(x0) + g(x1);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(x0 + k as f64 * h);
    }
    s * h / 3.0 + 0.5 * (f(lo as f64 + 1.0) + f(hi as f64))
}

/// Largest distance scanned by the half-line sampler: the remaining mass
/// beyond `D` is at most `β ln(D/(D-1)) < eps`.
pub fn truncation_distance(beta: f64, eps: f64) -> u64 {
    let d = 1.0 / (-(-eps / beta).exp_m1());
    (d.floor() as u64).saturating_add(1).min(1u64 << 62)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_probability_values() {
        let p = LrpParams::new(1.0, 0).unwrap();
        assert!((edge_probability(&p, 2).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(edge_probability(&p, 1).unwrap(), 1.0);
        let p2 = LrpParams::new(2.0, 0).unwrap();
        assert!((edge_probability(&p2, 10).unwrap() - 0.0199).abs() < 1e-14);
        assert!(edge_probability(&p, 0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LrpParams::new(0.0, 1).is_err());
        assert!(LrpParams::with_eps(1.0, 1, 1e-3).is_err());
        assert!(LrpParams::with_eps(1.0, 1, 1e-7).is_ok());
    }

    #[test]
    fn unit_square_matches_edge_law() {
        for d in [2i64, 3, 17, 1000] {
            let j = rect_integral(0.0, 1.0, d as f64, d as f64 + 1.0).unwrap();
            let p = 1.0 - (-1.5 * j).exp();
            assert!((p - p_edge(1.5, d as u64)).abs() < 1e-14);
        }
    }

    #[test]
    fn rect_integral_errors() {
        assert!(matches!(rect_integral(0.0, 2.0, 1.0, 3.0), Err(LrpError::InvalidArgument(_))));
        assert!(matches!(rect_integral(0.0, 1.0, 1.0, 2.0), Err(LrpError::DivergentIntegral(_))));
        assert!(matches!(
            rect_integral(f64::NEG_INFINITY, 0.0, 1.0, f64::INFINITY),
            Err(LrpError::DivergentIntegral(_))
        ));
        assert_eq!(rect_integral(0.0, 0.0, 1.0, 2.0).unwrap(), 0.0);
        // reversed order is accepted
        let a = rect_integral(0.0, 1.0, 5.0, 9.0).unwrap();
        let b = rect_integral(5.0, 9.0, 0.0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lemma_rectangle_at_s0() {
        // block [-2^{k+1}, -2^{k}) against [-2^{k-1}, 2^k]: each side is ln 2
        let j = rect_integral(-16.0, -8.0, -4.0, 8.0).unwrap();
        assert!((j - 2f64.ln()).abs() < 1e-14);
        let p = LrpParams::new(1.0, 0).unwrap();
        let survive = rectangle_no_edge_probability(&p, -16.0, -8.0, -4.0, 8.0).unwrap().powi(2);
        assert!((1.0 - survive - 0.75).abs() < 1e-14);
        assert!(1.0 - survive <= 15.0 / 16.0);
    }

    #[test]
    fn adjacent_spans_drop_the_nearest_neighbour_cell() {
        let r = PairRect::new(Span::new(0, 0), Span::new(1, 1));
        assert_eq!(r.no_edge_probability(1.0).unwrap(), 1.0);
        let r = PairRect::new(Span::new(0, 1), Span::new(2, 3));
        // long pairs: (0,2) (0,3) (1,3)
        let want = (1.0 - p_edge(1.0, 2)) * (1.0 - p_edge(1.0, 3)) * (1.0 - p_edge(1.0, 2));
        assert!((r.no_edge_probability(1.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn span_basics() {
        let s = Span::new(-3, 4);
        assert_eq!(s.len(), Some(8));
        assert!(Span::up_to(0).contains(-100));
        assert!(!Span::from(1).contains(0));
        assert!(Span::all().contains_span(&Span::up_to(3)));
        assert!(!Span::new(0, 5).contains_span(&Span::from(1)));
        assert!(Span::new(3, 2).is_empty());
        assert_eq!(Span::up_to(5).intersect(&Span::from(2)), Span::new(2, 5));
    }

    #[test]
    fn mu_layer_band() {
        for beta in [0.5, 1.0, 2.0] {
            for i in 1..12 {
                let m = mu_layer(beta, i);
                assert!(m <= beta * 2f64.ln() + 1e-12, "beta {beta} i {i} mu {m}");
                assert!(m > 0.0);
            }
        }
        let direct = mu_layer(1.0, 24);
        let x0 = (1u64 << 23) as f64;
        assert!((direct - 2f64.ln()).abs() < 1.0 / x0 * 4.0);
        let approx = mu_layer(1.0, 25);
        assert!((approx - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn truncation_distance_mass() {
        let d = truncation_distance(1.0, 1e-12) as f64;
        assert!((1.0 / (d - 1.0)).ln_1p() < 1e-12);
        assert!((1.0 / (d - 2.0)).ln_1p() >= 1e-12 * 0.999);
    }
}
