use super::quantiles::cell_seed;
use crate::error::{invalid, Result};
use crate::model::{sample_window, LrpParams, LrpWindow, PairRect, Span};
use crate::network::{hat_resistance, Statistic};
use crate::rng::domain;
use crate::stats::{ols, LinearFit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// Bonds `(i, i+1)`, `i ∈ [-N, N)`, not spanned by any window long edge.
pub fn cut_bonds(window: &LrpWindow, size: i64) -> Vec<bool> {
    spanned(window, size, false).into_iter().map(|s| !s).collect()
}

/// Whether each bond of `[-N, N]` is spanned; with `boundary`, edges from
/// `[-N, N]` to the outside count too.
fn spanned(window: &LrpWindow, size: i64, boundary: bool) -> Vec<bool> {
    let len = (2 * size) as usize;
    // difference array over bond indices i + N
    let mut diff = vec![0i64; len + 1];
    let inside = |v: i64| v >= -size && v <= size;
    for (u, v) in window.edges() {
        let (a, b) = (u.min(v), u.max(v));
        if b - a <= 1 {
            continue;
        }
        let keep = if boundary { inside(a) || inside(b) } else { inside(a) && inside(b) };
        if !keep {
            continue;
        }
        let lo = a.max(-size);
        let hi = b.min(size);
        if lo < hi {
            diff[(lo + size) as usize] += 1;
            diff[(hi + size) as usize] -= 1;
        }
    }
    let mut acc = 0;
    diff[..len]
        .iter()
        .map(|d| {
            acc += d;
            acc > 0
        })
        .collect()
}

/// Cut bonds left and right of 0 that no edge touching `[-N, N]` spans.
pub fn strict_cut_counts(window: &LrpWindow, size: i64) -> (usize, usize) {
    let s = spanned(window, size, true);
    let left = s[..size as usize].iter().filter(|&&x| !x).count();
    let right = s[size as usize..].iter().filter(|&&x| !x).count();
    (left, right)
}

/// Series chains on both sides of 0 in parallel: `C_L C_R / (C_L + C_R)`.
pub fn cut_lower_bound(left: usize, right: usize) -> f64 {
    if left == 0 || right == 0 {
        0.0
    } else {
        (left * right) as f64 / (left + right) as f64
    }
}

/// Exact probability that bond `(i, i+1)` is not spanned inside `[-N, N]`.
pub fn cut_probability(beta: f64, size: i64, i: i64) -> Result<f64> {
    PairRect::new(Span::new(-size, i), Span::new(i + 1, size)).no_edge_probability(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutEdgeRow {
    pub n: u32,
    pub size: i64,
    pub mean_count: f64,
    pub exact_mean: f64,
    /// Empirical frequency of the middle bond `(0, 1)` being cut.
    pub middle_freq: f64,
    pub middle_exact: f64,
    /// `(2N)^{-β}`.
    pub heuristic: f64,
    pub replicas: usize,
    /// Replicas with `R(0, [-N,N]^c)` below the series-parallel cut bound.
    pub bound_violations: usize,
    /// Replicas with `R(0, [-N,N]^c)` below the plain cut-bond count.
    pub below_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutEdgeReport {
    pub beta: f64,
    pub rows: Vec<CutEdgeRow>,
    /// Fit of `ln(mean count)` against `ln N`.
    pub slope: Option<LinearFit>,
}

impl CutEdgeReport {
    pub const CSV_HEADER: &'static str =
        "beta,n,N,mean_count,exact_mean,middle_freq,middle_exact,heuristic,replicas,bound_violations,below_count";

    pub fn csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                self.beta,
                r.n,
                r.size,
                r.mean_count,
                r.exact_mean,
                r.middle_freq,
                r.middle_exact,
                r.heuristic,
                r.replicas,
                r.bound_violations,
                r.below_count
            ));
        }
        s
    }
}

/// Cut-edge counts on `[-N, N]` and the per-replica resistance bound.
pub fn cutedge_baseline(
    beta: f64,
    n_range: RangeInclusive<u32>,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> Result<CutEdgeReport> {
    if replicas == 0 || n_range.is_empty() || *n_range.end() > 24 {
        return Err(invalid("need replicas and a scale range ending at 24 or below"));
    }
    let mut rows = Vec::new();
    for n in n_range {
        let size = 1i64 << n;
        let params = LrpParams::with_eps(beta, cell_seed(seed, domain::CUTEDGE, n), eps)?;
        let per: Result<Vec<(usize, bool, bool, bool)>> = (0..replicas as u64)
            .into_par_iter()
            .map(|rep| {
                let w = sample_window(&params, -size, size, &[], rep)?;
                let cuts = cut_bonds(&w, size);
                let (l, r) = strict_cut_counts(&w, size);
                let res = hat_resistance(&w, &Statistic::Point { size })?.value.as_f64();
                let violated = res < cut_lower_bound(l, r) * (1.0 - 1e-9);
                let count = cuts.iter().filter(|&&c| c).count();
                Ok((count, cuts[size as usize], violated, res < count as f64))
            })
            .collect();
        let per = per?;
        let m = replicas as f64;
        let exact_mean = (-size..size).map(|i| cut_probability(beta, size, i)).sum::<Result<f64>>()?;
        rows.push(CutEdgeRow {
            n,
            size,
            mean_count: per.iter().map(|p| p.0 as f64).sum::<f64>() / m,
            exact_mean,
            middle_freq: per.iter().filter(|p| p.1).count() as f64 / m,
            middle_exact: cut_probability(beta, size, 0)?,
            heuristic: (2.0 * size as f64).powf(-beta),
            replicas,
            bound_violations: per.iter().filter(|p| p.2).count(),
            below_count: per.iter().filter(|p| p.3).count(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.mean_count > 0.0).map(|r| ((r.size as f64).ln(), r.mean_count.ln())).unzip();
    Ok(CutEdgeReport { beta, rows, slope: ols(&x, &y, 0.95).ok() })
}
