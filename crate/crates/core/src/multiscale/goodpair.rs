use crate::error::{invalid, Result};
use crate::model::{sample_rect_points, sample_window, LrpParams, LrpWindow, PairRect, Span};
use crate::rng::{self, domain, Rng};
use crate::stats::{ols, LinearFit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The dyadic pair `I_i^-(z) = [z-2^{i+1}, z-2^i)`, `I_i^+(z) = (z+2^i, z+2^{i+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodPairQuery {
    pub z: i64,
    pub i: u32,
}

impl GoodPairQuery {
    pub fn new(z: i64, i: u32) -> Self {
        GoodPairQuery { z, i }
    }

    fn pow(&self, k: u32) -> i64 {
        1i64 << k
    }

    pub fn minus(&self) -> Span {
        Span::new(self.z - self.pow(self.i + 1), self.z - self.pow(self.i) - 1)
    }

    pub fn plus(&self) -> Span {
        Span::new(self.z + self.pow(self.i) + 1, self.z + self.pow(self.i + 1))
    }

    /// The two rectangles that must carry no long edge.
    pub fn rects(&self) -> [PairRect; 2] {
        let (z, a, b) = (self.z, self.pow(self.i), self.pow(self.i + 1));
        [
            PairRect::new(Span::new(z - b, z + a), Span::from(z + b + 1)),
            PairRect::new(Span::up_to(z - b - 1), Span::new(z - a, z + b)),
        ]
    }

    /// Vertices that must lie in a window for the query to be decidable.
    pub fn support(&self) -> Span {
        Span::new(self.z - self.pow(self.i + 1), self.z + self.pow(self.i + 1))
    }
}

/// Whether `(I_i^-(z), I_i^+(z))` is good in the sampled window.
pub fn is_good_pair(window: &LrpWindow, q: &GoodPairQuery) -> Result<bool> {
    for r in q.rects() {
        if window.has_long_edge_between(&r.a, &r.b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact probability that a pair at scale `i` is good.
pub fn good_pair_probability(beta: f64, i: u32) -> Result<f64> {
    let q = GoodPairQuery::new(0, i);
    let [r1, r2] = q.rects();
    Ok((-beta * (r1.long_edge_integral()? + r2.long_edge_integral()?)).exp())
}

/// Samples `(ξ_1, …, ξ_n)` for `z = 0` jointly, `ξ_i = 1` meaning good.
///
/// The union of the violating rectangles is split into disjoint bands, one
/// per scale on each side, and the Poisson points of each band are drawn.
pub fn sample_xi(beta: f64, n: u32, rng: &mut Rng) -> Result<Vec<bool>> {
    if n == 0 || n > 60 {
        return Err(invalid(format!("scale count must lie in [1, 60], got {n}")));
    }
    let p = |k: u32| (1u64 << k) as f64;
    let mut good = vec![true; n as usize];
    for i in 1..=n {
        let y_hi = if i == n { f64::INFINITY } else { p(i + 2) + 1.0 };
        for pt in sample_rect_points(beta, -p(i + 1), p(i) + 1.0, p(i + 1) + 1.0, y_hi, rng)? {
            let (u, v) = pt.edge();
            for m in 1..=i {
                let (a, b) = ((1i64 << m), (1i64 << (m + 1)));
                if u >= -b && u <= a && v > b {
                    good[m as usize - 1] = false;
                }
            }
        }
        let x_lo = if i == n { f64::NEG_INFINITY } else { -p(i + 2) };
        for pt in sample_rect_points(beta, x_lo, -p(i + 1), -p(i), p(i + 1) + 1.0, rng)? {
            let (u, v) = pt.edge();
            for m in 1..=i {
                let (a, b) = ((1i64 << m), (1i64 << (m + 1)));
                if u < -b && v >= -a && v <= b {
                    good[m as usize - 1] = false;
                }
            }
        }
    }
    Ok(good)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodPairRow {
    pub beta: f64,
    pub i: u32,
    pub replicas: usize,
    pub hits: usize,
    pub frequency: f64,
    pub exact: f64,
    pub sigma: f64,
}

impl GoodPairRow {
    pub fn z_score(&self) -> f64 {
        if self.sigma > 0.0 {
            (self.frequency - self.exact) / self.sigma
        } else {
            0.0
        }
    }
}

/// Frequency of goodness at `z = 0` over sampled windows `[-2^{i+1}, 2^{i+1}]`.
pub fn good_pair_frequency(beta: f64, i: u32, replicas: usize, seed: u64, eps: f64) -> Result<GoodPairRow> {
    if replicas == 0 || i == 0 || i > 24 {
        return Err(invalid("need replicas and a scale in [1, 24]"));
    }
    let q = GoodPairQuery::new(0, i);
    let support = q.support();
    let params = LrpParams::with_eps(beta, rng::derive(seed, i as u64 ^ (domain::GOODPAIR << 32)), eps)?;
    let good: Result<Vec<bool>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| is_good_pair(&sample_window(&params, support.lo.unwrap(), support.hi.unwrap(), &[], rep)?, &q))
        .collect();
    let hits = good?.iter().filter(|&&g| g).count();
    let exact = good_pair_probability(beta, i)?;
    Ok(GoodPairRow {
        beta,
        i,
        replicas,
        hits,
        frequency: hits as f64 / replicas as f64,
        exact,
        sigma: (exact * (1.0 - exact) / replicas as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiTailRow {
    pub n: u32,
    pub t: f64,
    /// Estimate of `P[Σ_{i≤n} ξ_i ≤ t n]`.
    pub probability: f64,
    pub hits: usize,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiTailReport {
    pub beta: f64,
    pub rows: Vec<XiTailRow>,
    /// Per threshold `t`: fit of `ln P` against `n` over rows with hits.
    pub slopes: Vec<(f64, Option<LinearFit>)>,
}

/// Estimates the lower tail of `Σ ξ_i` over a grid of `n` and `t`.
pub fn xi_sum_tail(beta: f64, n_values: &[u32], t_grid: &[f64], replicas: usize, seed: u64) -> Result<XiTailReport> {
    if replicas < 100 {
        return Err(invalid(format!("need at least 100 replicas, got {replicas}")));
    }
    let n_max = *n_values.iter().max().ok_or_else(|| invalid("empty n grid"))?;
    let samples: Result<Vec<Vec<bool>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| sample_xi(beta, n_max, &mut rng::stream(seed, domain::XI, rep)))
        .collect();
    let samples = samples?;
    let mut rows = Vec::new();
    for &t in t_grid {
        for &n in n_values {
            let hits = samples
                .iter()
                .filter(|s| s[..n as usize].iter().filter(|&&g| g).count() as f64 <= t * n as f64 + 1e-12)
                .count();
            rows.push(XiTailRow { n, t, probability: hits as f64 / replicas as f64, hits, replicas });
        }
    }
    let slopes = t_grid
        .iter()
        .map(|&t| {
            let (x, y): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.t == t && r.hits > 0).map(|r| (r.n as f64, r.probability.ln())).unzip();
            (t, ols(&x, &y, 0.95).ok())
        })
        .collect();
    Ok(XiTailReport { beta, rows, slopes })
}

/// `w_r = P[ξ_{i_1} = ⋯ = ξ_{i_r} = 0]` for each prefix of `s`.
pub fn joint_failure_rate(beta: f64, s: &[u32], replicas: usize, seed: u64) -> Result<Vec<f64>> {
    let n_max = *s.iter().max().ok_or_else(|| invalid("empty scale set"))?;
    if s.contains(&0) {
        return Err(invalid("scales start at 1"));
    }
    let counts = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<usize>> {
            let xi = sample_xi(beta, n_max, &mut rng::stream(seed, domain::XI, rep))?;
            let mut out = vec![0; s.len()];
            for r in 0..s.len() {
                if s[..=r].iter().all(|&i| !xi[i as usize - 1]) {
                    out[r] = 1;
                } else {
                    break;
                }
            }
            Ok(out)
        })
        .try_reduce(|| vec![0; s.len()], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))?;
    Ok(counts.iter().map(|&c| c as f64 / replicas as f64).collect())
}
