//! Scale machinery: the sequences `b_k`, `d_k`, `K_n`, `k_0`, good and very
//! good pairs, the inflow set `Z` and the events `E` and `F`.

mod goodpair;
mod ledger;

pub use goodpair::{
    good_pair_frequency, good_pair_probability, is_good_pair, joint_failure_rate, sample_xi, xi_sum_tail,
    GoodPairQuery, GoodPairRow, XiTailReport, XiTailRow,
};
pub use ledger::{
    build_scale_ledger, check_event_e, check_event_f, event_f_probability, inflow_points, ledger_window, sample_ledger,
    very_good_flags, EventReport, LedgerSummary, PairRecord, ScaleLedger, VeryGoodFlags,
};

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Logarithm used in the recursion for `b_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = crate::LrpError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "e" | "ln" => Ok(LogBase::Natural),
            "two" | "2" | "log2" => Ok(LogBase::Two),
            _ => Err(invalid(format!("unknown log base {s:?}"))),
        }
    }
}

/// `d_0 = 0`, `d_k = d_{k-1} + M + L log(M + d_{k-1})`, for `k ≤ k_max`.
pub fn d_sequence(big_m: f64, big_l: f64, base: LogBase, k_max: usize) -> Result<Vec<f64>> {
    if !(big_m > 0.0 && big_m.is_finite() && big_l >= 0.0 && big_l.is_finite()) {
        return Err(invalid(format!("need M > 0 and L >= 0, got M = {big_m}, L = {big_l}")));
    }
    let mut d = vec![0.0];
    for _ in 0..k_max {
        let prev = *d.last().unwrap();
        let step = big_m + big_l * base.log(big_m + prev);
        if !(step > 0.0) {
            return Err(invalid(format!("scale step {step} is not positive for M = {big_m}, L = {big_l}")));
        }
        d.push(prev + step);
    }
    Ok(d)
}

/// The bounds `kM + L Σ log i ≤ d_k ≤ kM + 2L Σ log(LMi)`.
pub fn d_bounds(big_m: f64, big_l: f64, base: LogBase, k: usize) -> (f64, f64) {
    let kf = k as f64;
    let lower = kf * big_m + big_l * (1..=k).map(|i| base.log(i as f64)).sum::<f64>();
    let upper = kf * big_m + 2.0 * big_l * (1..=k).map(|i| base.log(big_l * big_m * i as f64)).sum::<f64>();
    (lower, upper)
}

/// The scale bands for one `n`: `b_k = n - d_k` for `k = 0..=K_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub n: u32,
    pub big_m: f64,
    pub big_l: f64,
    pub base: LogBase,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub k_n: usize,
}

impl ScaleSchedule {
    pub fn new(n: u32, big_m: f64, big_l: f64, base: LogBase) -> Result<Self> {
        let mut d = d_sequence(big_m, big_l, base, 0)?;
        loop {
            let next = d_sequence(big_m, big_l, base, d.len())?;
            if next[d.len()] > n as f64 {
                break;
            }
            d = next;
        }
        let b: Vec<f64> = d.iter().map(|x| n as f64 - x).collect();
        let k_n = b.len() - 1;
        Ok(ScaleSchedule { n, big_m, big_l, base, b, d, k_n })
    }

    /// Integer scales `j` with `b_k < j ≤ b_{k-1}`, for `1 ≤ k ≤ K_n`.
    pub fn band_scales(&self, k: usize) -> std::ops::RangeInclusive<u32> {
        assert!(k >= 1 && k <= self.k_n, "band {k} outside 1..={}", self.k_n);
        let lo = self.b[k].floor() as u32 + 1;
        let hi = self.b[k - 1].floor() as u32;
        lo..=hi
    }
}

/// `c' = (1 + (1 - γ/2)^{1/β}) / 2`.
pub fn c_prime(beta: f64, gamma: f64) -> f64 {
    (1.0 + (1.0 - gamma / 2.0).powf(1.0 / beta)) / 2.0
}

/// `k_0 = inf{k ≥ 1 : d_{k-1} - 1 ≥ log2(1/(1-c'))}`.
pub fn k0(big_m: f64, big_l: f64, base: LogBase, c_prime: f64) -> Result<usize> {
    if !(c_prime > 0.0 && c_prime < 1.0) {
        return Err(invalid(format!("c' must lie in (0,1), got {c_prime}")));
    }
    let target = (1.0 / (1.0 - c_prime)).log2();
    let mut k = 1;
    loop {
        let d = d_sequence(big_m, big_l, base, k - 1)?;
        if d[k - 1] - 1.0 >= target {
            return Ok(k);
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_value() {
        let d = d_sequence(4.0, 3.0, LogBase::Natural, 2).unwrap();
        assert_eq!(d[0], 0.0);
        assert!((d[1] - (4.0 + 3.0 * 4f64.ln())).abs() < 1e-12);
        assert!((d[1] - 8.1589).abs() < 1e-4);
    }

    #[test]
    fn lemma_bounds_hold() {
        for &(m, l) in &[(2.05, 2.05), (4.0, 3.0), (10.0, 2.5)] {
            let d = d_sequence(m, l, LogBase::Natural, 100).unwrap();
            for k in 1..=100 {
                let (lo, hi) = d_bounds(m, l, LogBase::Natural, k);
                assert!(lo <= d[k] && d[k] <= hi, "k={k} {lo} {} {hi}", d[k]);
            }
        }
    }

    #[test]
    fn schedule_is_decreasing_and_nonnegative() {
        let s = ScaleSchedule::new(20, 2.05, 2.05, LogBase::Natural).unwrap();
        assert_eq!(s.b[0], 20.0);
        assert!(s.b.windows(2).all(|w| w[1] < w[0]));
        assert!(*s.b.last().unwrap() >= 0.0);
        let next = d_sequence(2.05, 2.05, LogBase::Natural, s.k_n + 1).unwrap()[s.k_n + 1];
        assert!(next > 20.0);
        for k in 1..=s.k_n {
            for j in s.band_scales(k) {
                assert!((j as f64) > s.b[k] && (j as f64) <= s.b[k - 1]);
            }
        }
    }

    #[test]
    fn small_n_has_one_band() {
        let s = ScaleSchedule::new(9, 2.05, 2.05, LogBase::Natural).unwrap();
        assert_eq!(s.k_n, 1);
        let s = ScaleSchedule::new(10, 2.05, 2.05, LogBase::Natural).unwrap();
        assert_eq!(s.k_n, 2);
    }

    #[test]
    fn c_prime_and_k0() {
        let c = c_prime(1.0, 0.5);
        assert!((c - 0.875).abs() < 1e-12);
        // log2(8) = 3, so d_{k0-1} >= 4
        let k = k0(2.05, 2.05, LogBase::Natural, c).unwrap();
        let d = d_sequence(2.05, 2.05, LogBase::Natural, k).unwrap();
        assert!(d[k - 1] >= 4.0 && (k == 1 || d[k - 2] < 4.0));
    }
}
