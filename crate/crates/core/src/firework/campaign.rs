use super::{brute_force_spread, reach_tail_bound, run_spread, sample_coupled, MAX_EXACT_R};
use crate::error::{invalid, Result};
use crate::rng::{self, derive, domain};
use crate::stats::{ols, LinearFit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// `{first, first + gap, …}` with `r` elements.
pub fn scale_set(r: usize, first: u32, gap: u32) -> Vec<u32> {
    (0..r as u32).map(|t| first + gap * t).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub beta: f64,
    pub s: Vec<u32>,
    pub replicas: usize,
    /// Counts of `M_r = m` at index `m - 1`.
    pub counts: Vec<usize>,
    pub exact: Vec<f64>,
    /// Per bin `(count - n p) / sqrt(n p (1 - p))`; zero for empty bins.
    pub z_scores: Vec<f64>,
}

impl HistogramReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Monte Carlo histogram of `M_r` against exact enumeration.
pub fn m_r_histogram(beta: f64, s: &[u32], replicas: usize, seed: u64) -> Result<HistogramReport> {
    if s.len() > MAX_EXACT_R || replicas == 0 {
        return Err(invalid(format!("need 1 <= r <= {MAX_EXACT_R} and replicas > 0")));
    }
    let exact = brute_force_spread(beta, s)?;
    let ms: Result<Vec<usize>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| Ok(run_spread(beta, s, &mut rng::stream(seed, domain::FIREWORK, rep))?.m_r))
        .collect();
    let mut counts = vec![0; s.len() + 1];
    for m in ms? {
        counts[m - 1] += 1;
    }
    let n = replicas as f64;
    let z_scores = counts
        .iter()
        .zip(&exact)
        .map(|(&c, &p)| {
            let var = n * p * (1.0 - p);
            if var > 0.0 {
                (c as f64 - n * p) / var.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(HistogramReport { beta, s: s.to_vec(), replicas, counts, exact, z_scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub r: usize,
    pub beta: f64,
    pub replicas: usize,
    /// Estimate of `P[M_r ≤ 1]`.
    pub p_hat: f64,
    pub exact: Option<f64>,
    /// Estimate of `P[M_r ≥ r]`.
    pub p_literal: f64,
    /// Replicas with every `ξ_{i_t} = 0` but `M_r > 1`.
    pub containment_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub beta: f64,
    pub first: u32,
    pub gap: u32,
    pub rows: Vec<DecayRow>,
    /// Fit of `ln p_hat` against `r`.
    pub fit: Option<LinearFit>,
}

impl DecayReport {
    pub const CSV_HEADER: &'static str = "r,beta,replicas,P_hat,exact,P_literal,kappa";

    /// `κ̂ = e^{slope}` with its 95% interval.
    pub fn kappa(&self) -> Option<(f64, (f64, f64))> {
        self.fit.map(|f| (f.slope.exp(), (f.slope_ci.0.exp(), f.slope_ci.1.exp())))
    }

    pub fn csv(&self) -> String {
        let kappa = self.kappa().map_or(String::new(), |k| k.0.to_string());
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.r,
                r.beta,
                r.replicas,
                r.p_hat,
                r.exact.map_or(String::new(), |e| e.to_string()),
                r.p_literal,
                kappa
            ));
        }
        out
    }
}

/// Geometric decay of `P[M_r ≤ 1]` over `r`, with scale sets `{first, first + gap, …}`.
pub fn decay_campaign(
    beta: f64,
    r_range: RangeInclusive<usize>,
    first: u32,
    gap: u32,
    replicas: usize,
    seed: u64,
) -> Result<DecayReport> {
    if replicas == 0 || r_range.is_empty() || *r_range.start() == 0 {
        return Err(invalid("need replicas and a nonempty range of r >= 1"));
    }
    let mut rows = Vec::new();
    for r in r_range {
        let s = scale_set(r, first, gap);
        let cell = derive(seed, r as u64);
        let samples: Result<Vec<(usize, bool)>> = (0..replicas as u64)
            .into_par_iter()
            .map(|rep| {
                let c = sample_coupled(beta, &s, &mut rng::stream(cell, domain::FIREWORK, rep))?;
                Ok((c.state.m_r, c.covered.iter().all(|&x| x)))
            })
            .collect();
        let samples = samples?;
        let n = replicas as f64;
        let exact = if r <= MAX_EXACT_R { Some(brute_force_spread(beta, &s)?[0]) } else { None };
        rows.push(DecayRow {
            r,
            beta,
            replicas,
            p_hat: samples.iter().filter(|x| x.0 <= 1).count() as f64 / n,
            exact,
            p_literal: samples.iter().filter(|x| x.0 >= r).count() as f64 / n,
            containment_violations: samples.iter().filter(|x| x.1 && x.0 > 1).count(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.p_hat > 0.0).map(|r| (r.r as f64, r.p_hat.ln())).unzip();
    Ok(DecayReport { beta, first, gap, rows, fit: ols(&x, &y, 0.95).ok() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: usize,
    pub s: u32,
    pub empirical: f64,
    pub bound: f64,
    pub sigma: f64,
}

impl TailRow {
    pub fn within(&self, n_sigma: f64) -> bool {
        self.empirical <= self.bound + n_sigma * self.sigma
    }
}

/// Empirical `P[L_k > s]` from edge-level coupled samples, against the
/// uniform bound, for every spreader `k` and `s ∈ [0, s_max]` with `s < k - 1`.
pub fn reach_tail_check(beta: f64, set: &[u32], s_max: u32, replicas: usize, seed: u64) -> Result<Vec<TailRow>> {
    if replicas == 0 {
        return Err(invalid("need replicas"));
    }
    let reaches: Result<Vec<Vec<u32>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| Ok(sample_coupled(beta, set, &mut rng::stream(seed, domain::FIREWORK, rep))?.state.reach))
        .collect();
    let reaches = reaches?;
    let n = replicas as f64;
    let mut rows = Vec::new();
    for k in 2..=set.len() + 1 {
        for s in 0..=s_max.min(k as u32 - 2) {
            let hits = reaches.iter().filter(|r| r[k - 2] > s).count() as f64;
            let bound = reach_tail_bound(beta, s);
            rows.push(TailRow { k, s, empirical: hits / n, bound, sigma: (bound * (1.0 - bound) / n).sqrt() });
        }
    }
    Ok(rows)
}
