use super::quantiles::{empirical_quantile, quantile_index};
use crate::error::{LrpError, Result};
use crate::rng::{self, domain};
use crate::stats::{ols, LinearFit};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `ln a_n ≈ ln c + δ n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub delta: f64,
    pub c: f64,
    /// 95% interval for `δ`: replica bootstrap when replicas are available,
    /// otherwise the least-squares t interval.
    pub ci: (f64, f64),
    pub t_ci: (f64, f64),
    pub bootstrap: bool,
    pub points: usize,
}

fn finite_points(points: &[(u32, f64)]) -> (Vec<f64>, Vec<f64>) {
    points.iter().filter(|(_, a)| a.is_finite() && *a > 0.0).map(|&(n, a)| (n as f64, a.ln())).unzip()
}

fn line(points: &[(u32, f64)]) -> Result<LinearFit> {
    let (x, y) = finite_points(points);
    if x.len() < 4 {
        return Err(LrpError::InsufficientData(format!("need at least 4 finite positive scales, got {}", x.len())));
    }
    ols(&x, &y, 0.95)
}

/// Least-squares fit of `ln a_n` against `n` on the finite positive entries.
pub fn fit_exponent(points: &[(u32, f64)]) -> Result<ExponentFit> {
    let f = line(points)?;
    Ok(ExponentFit {
        delta: f.slope,
        c: f.intercept.exp(),
        ci: f.slope_ci,
        t_ci: f.slope_ci,
        bootstrap: false,
        points: f.points,
    })
}

/// Fit of the per-scale `α`-quantiles of `values`, with a percentile
/// bootstrap interval over replicas. With `paired`, replica `r` of every
/// scale comes from the same environment and replicas are resampled jointly.
pub fn fit_exponent_replicas(
    values: &BTreeMap<u32, Vec<f64>>,
    alpha: f64,
    paired: bool,
    resamples: usize,
    seed: u64,
) -> Result<ExponentFit> {
    let point = |v: &BTreeMap<u32, Vec<f64>>| -> Result<Vec<(u32, f64)>> {
        v.iter().map(|(&n, xs)| Ok((n, empirical_quantile(xs, alpha)?))).collect()
    };
    let base = fit_exponent(&point(values)?)?;
    let m = values.values().map(|v| v.len()).min().unwrap_or(0);
    if paired && values.values().any(|v| v.len() != m) {
        return Err(crate::error::invalid("paired resampling needs equal replica counts"));
    }
    let mut rng = rng::stream(seed, domain::BOOTSTRAP, 0xf17);
    let mut slopes = Vec::with_capacity(resamples);
    let mut buf = Vec::new();
    for _ in 0..resamples {
        let shared: Vec<usize> = if paired { (0..m).map(|_| rng.random_range(0..m)).collect() } else { vec![] };
        let mut pts = Vec::with_capacity(values.len());
        for (&n, xs) in values {
            buf.clear();
            if paired {
                buf.extend(shared.iter().map(|&i| xs[i]));
            } else {
                buf.extend((0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]));
            }
            buf.sort_by(f64::total_cmp);
            pts.push((n, buf[quantile_index(buf.len(), alpha)]));
        }
        if let Ok(f) = line(&pts) {
            slopes.push(f.slope);
        }
    }
    if slopes.len() < resamples / 2 {
        return Ok(base);
    }
    slopes.sort_by(f64::total_cmp);
    let k = slopes.len();
    let lo = slopes[((0.025 * k as f64) as usize).min(k - 1)];
    let hi = slopes[((0.975 * k as f64) as usize).min(k - 1)];
    Ok(ExponentFit { ci: (lo.min(base.delta), hi.max(base.delta)), bootstrap: true, ..base })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let pts: Vec<(u32, f64)> = (3..10).map(|n| (n, 2.0 * (0.3 * n as f64).exp())).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.delta - 0.3).abs() < 1e-9);
        assert!((f.c - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_input() {
        let pts: Vec<(u32, f64)> = (3..10).map(|n| (n, 5.0)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!(f.delta.abs() < 1e-12);
    }

    #[test]
    fn too_few_finite_points() {
        let pts = vec![(1, 1.0), (2, 2.0), (3, f64::INFINITY), (4, 4.0)];
        assert!(matches!(fit_exponent(&pts), Err(LrpError::InsufficientData(_))));
    }

    #[test]
    fn bootstrap_interval_brackets_estimate() {
        let mut v = BTreeMap::new();
        for n in 4..9u32 {
            let xs: Vec<f64> = (0..200).map(|r| (0.2 * n as f64).exp() * (1.0 + (r % 17) as f64 / 10.0)).collect();
            v.insert(n, xs);
        }
        let f = fit_exponent_replicas(&v, 0.5, true, 100, 1).unwrap();
        assert!(f.bootstrap);
        assert!(f.ci.0 <= f.delta && f.delta <= f.ci.1);
        assert!((f.delta - 0.2).abs() < 1e-9);
    }
}
