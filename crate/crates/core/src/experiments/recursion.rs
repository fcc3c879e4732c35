use super::quantiles::QuantileTable;
use crate::error::Result;
use crate::multiscale::{LogBase, ScaleSchedule};
use crate::stats::{ols, LinearFit};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionRow {
    pub n: u32,
    pub k_n: usize,
    /// `S_n = Σ_{k=2}^{K_n} min_{b_k < j ≤ b_{k-1}} â_{α,j} / d_k`.
    pub s_n: f64,
    pub a_n: f64,
    /// `â_{α,n} / S_n`; `None` when the sum is empty.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub big_m: f64,
    pub big_l: f64,
    pub rows: Vec<RecursionRow>,
    pub min_ratio: Option<f64>,
    /// Least-squares trend of the finite ratios against `n`.
    pub slope: Option<LinearFit>,
}

impl RecursionReport {
    /// A positive minimum and no significant downward trend.
    pub fn passes(&self) -> bool {
        self.min_ratio.is_some_and(|r| r > 0.0) && self.slope.is_none_or(|f| f.slope_ci.1 >= 0.0)
    }
}

/// `S_n` for one scale.
pub fn recursion_sum(table: &QuantileTable, schedule: &ScaleSchedule) -> Result<f64> {
    let mut s = 0.0;
    for k in 2..=schedule.k_n {
        let mut band_min = f64::INFINITY;
        for j in schedule.band_scales(k) {
            band_min = band_min.min(table.get(j)?);
        }
        s += band_min / schedule.d[k];
    }
    Ok(s)
}

/// Evaluates `â_{α,n} / S_n` over `n_values`.
pub fn recursion_check(
    table: &QuantileTable,
    big_m: f64,
    big_l: f64,
    base: LogBase,
    n_values: &[u32],
) -> Result<RecursionReport> {
    let mut rows = Vec::new();
    for &n in n_values {
        let schedule = ScaleSchedule::new(n, big_m, big_l, base)?;
        let a_n = table.get(n)?;
        let s_n = recursion_sum(table, &schedule)?;
        let ratio = (schedule.k_n >= 2).then(|| a_n / s_n);
        rows.push(RecursionRow { n, k_n: schedule.k_n, s_n, a_n, ratio });
    }
    let finite: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| r.ratio.filter(|x| x.is_finite()).map(|x| (r.n as f64, x))).collect();
    let min_ratio = rows.iter().filter_map(|r| r.ratio).reduce(f64::min);
    let (x, y): (Vec<f64>, Vec<f64>) = finite.into_iter().unzip();
    let slope = ols(&x, &y, 0.95).ok();
    Ok(RecursionReport { big_m, big_l, rows, min_ratio, slope })
}
