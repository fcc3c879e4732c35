//! Small statistical helpers: least squares with t intervals, one-sided
//! Kolmogorov-Smirnov, chi-square goodness of fit.

use crate::error::{LrpError, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub slope_ci: (f64, f64),
    pub intercept_ci: (f64, f64),
    pub points: usize,
}

/// Ordinary least squares of `y` on `x` with two-sided `level` t intervals.
pub fn ols(x: &[f64], y: &[f64], level: f64) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(LrpError::InvalidArgument("x and y lengths differ".into()));
    }
    if n < 3 {
        return Err(LrpError::InsufficientData(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(LrpError::InvalidArgument("x values are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    let slope_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("valid degrees of freedom").inverse_cdf(0.5 + level / 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
        slope_ci: (slope - t * slope_se, slope + t * slope_se),
        intercept_ci: (intercept - t * intercept_se, intercept + t * intercept_se),
        points: n,
    })
}

/// Result of a one-sided two-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Tests `H0: A ≥ B` stochastically against `F_A(x) > F_B(x)` for some `x`,
/// via `D⁺ = sup_x (F_A - F_B)` and the asymptotic `exp(-2 D² mn/(m+n))`.
/// `+∞` is allowed and ranks above every finite value.
pub fn ks_one_sided(a: &[f64], b: &[f64]) -> KsResult {
    let mut xa: Vec<f64> = a.to_vec();
    let mut xb: Vec<f64> = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (m, n) = (xa.len(), xb.len());
    if m == 0 || n == 0 {
        return KsResult { statistic: 0.0, p_value: 1.0 };
    }
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < m || j < n {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => break,
        };
        while i < m && xa[i] <= x {
            i += 1;
        }
        while j < n && xb[j] <= x {
            j += 1;
        }
        d = d.max(i as f64 / m as f64 - j as f64 / n as f64);
    }
    let en = (m * n) as f64 / (m + n) as f64;
    KsResult { statistic: d, p_value: (-2.0 * d * d * en).exp().min(1.0) }
}

/// Pearson chi-square statistic and upper-tail p-value. Bins with expected
/// count below 5 are pooled into their neighbour.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> (f64, f64) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&a, &b) in observed.iter().zip(expected) {
        o += a;
        e += b;
        if e >= 5.0 {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
            *lo += o;
            *le += e;
        } else {
            obs.push(o);
            exp.push(e);
        }
    }
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (obs.len().max(2) - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).expect("positive df").cdf(stat);
    (stat, p)
}

/// Median of finite-or-infinite values (upper median for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
