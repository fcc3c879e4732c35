use super::{c_prime, is_good_pair, k0, GoodPairQuery, LogBase, ScaleSchedule};
use crate::error::{invalid, Result};
use crate::experiments::QuantileTable;
use crate::model::{mu_layer, sample_window, LrpParams, LrpWindow, PairRect, Span};
use crate::network::{hat_resistance, Statistic};
use serde::{Deserialize, Serialize};

/// The window `[1 - 2N, 3N]` on which every ledger query is determined.
pub fn ledger_window(n: u32) -> (i64, i64) {
    let size = 1i64 << n;
    (1 - 2 * size, 3 * size)
}

/// The inflow set `Z`: points of `[1, N]` joined to `(-∞, 0]`, ascending.
pub fn inflow_points(window: &LrpWindow, n: u32) -> Result<Vec<i64>> {
    let size = 1i64 << n;
    if window.lo > 1 || window.hi < size {
        return Err(invalid(format!("window [{}, {}] does not contain [1, {size}]", window.lo, window.hi)));
    }
    let mut z: Vec<i64> = window
        .edges()
        .filter_map(|(u, v)| {
            let (a, b) = (u.min(v), u.max(v));
            (a <= 0 && b >= 1 && b <= size).then_some(b)
        })
        .collect();
    z.sort_unstable();
    z.dedup();
    Ok(z)
}

/// The three conditions of an `α`-very good pair around `z` at scale `j`.
/// The resistance conditions are left unevaluated when `lazy` is set and
/// the edge condition already fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VeryGoodFlags {
    pub no_shortcut: bool,
    pub right_resistance: Option<bool>,
    pub left_resistance: Option<bool>,
}

impl VeryGoodFlags {
    pub fn holds(&self) -> bool {
        self.no_shortcut && self.right_resistance == Some(true) && self.left_resistance == Some(true)
    }
}

pub fn very_good_flags(window: &LrpWindow, z: i64, j: u32, threshold: f64, lazy: bool) -> Result<VeryGoodFlags> {
    let (a, b) = (1i64 << j, 1i64 << (j + 1));
    if !window.span().contains_span(&Span::new(z - b, z + b)) {
        return Err(invalid(format!("window does not contain [{}, {}]", z - b, z + b)));
    }
    let right = PairRect::new(Span::new((z - b).max(0), z + a), Span::from(z + b + 1));
    let left = PairRect::new(Span::new(1, z - b - 1), Span::new(z - a, z + b));
    let no_shortcut =
        !window.has_long_edge_between(&right.a, &right.b)? && !window.has_long_edge_between(&left.a, &left.b)?;
    if lazy && !no_shortcut {
        return Ok(VeryGoodFlags { no_shortcut, right_resistance: None, left_resistance: None });
    }
    let r2 = Statistic::Hat { source: Span::new(z - b, z + a), sink: Span::from(z + b + 1) };
    let right_ok = hat_resistance(window, &r2)?.value.as_f64() >= threshold;
    if lazy && !right_ok {
        return Ok(VeryGoodFlags { no_shortcut, right_resistance: Some(false), left_resistance: None });
    }
    let r3 = Statistic::Hat { source: Span::new(z - a + 1, z + b), sink: Span::up_to(z - b) };
    let left_ok = hat_resistance(window, &r3)?.value.as_f64() >= threshold;
    Ok(VeryGoodFlags { no_shortcut, right_resistance: Some(right_ok), left_resistance: Some(left_ok) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    /// Band index `k`.
    pub k: usize,
    /// Inflow index `i` (into `Z`).
    pub i: usize,
    pub z: i64,
    pub j: u32,
    pub good: bool,
    pub very_good: VeryGoodFlags,
}

/// Scale bookkeeping for one sampled environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLedger {
    pub n: u32,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub schedule: ScaleSchedule,
    pub k0: usize,
    /// `z_0 = 1 < z_1 < ⋯ < z_η̄`.
    pub z: Vec<i64>,
    /// `η_l` for `l = 1..=n`, stored at `l - 1`.
    pub eta: Vec<u32>,
    pub records: Vec<PairRecord>,
    pub f_holds: bool,
}

impl ScaleLedger {
    pub fn eta_bar(&self) -> usize {
        self.z.len() - 1
    }

    /// `η̄_b = 1 + Σ_{l ≤ b} η_l`.
    pub fn eta_bar_at(&self, b: f64) -> usize {
        1 + self.eta.iter().take(b.max(0.0).floor() as usize).map(|&x| x as usize).sum::<usize>()
    }

    /// `Σ_{b_k < l ≤ b_{k-1}} η_l`.
    pub fn band_count(&self, k: usize) -> u32 {
        self.schedule.band_scales(k).map(|l| self.eta[l as usize - 1]).sum()
    }

    /// `Σ_{b_k < l ≤ b_{k-1}} μ_l`.
    pub fn band_mean(&self, k: usize) -> f64 {
        self.schedule.band_scales(k).map(|l| mu_layer(self.beta, l)).sum()
    }

    /// Inflow indices that need a very good pair in band `k`.
    pub fn demanded(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        self.eta_bar_at(self.schedule.b[k])..=self.eta_bar()
    }

    pub fn summary(&self) -> LedgerSummary {
        let e = check_event_e(self);
        LedgerSummary {
            n: self.n,
            big_m: self.schedule.big_m,
            big_l: self.schedule.big_l,
            alpha: self.alpha,
            k_n: self.schedule.k_n,
            k0: self.k0,
            eta_bar: self.eta_bar(),
            e_holds: e.holds,
            f_holds: self.f_holds,
            very_good_per_band: (1..=self.schedule.k_n)
                .map(|k| self.records.iter().filter(|r| r.k == k && r.very_good.holds()).count())
                .collect(),
        }
    }
}

/// Builds the ledger of `window` for `N = 2^n`.
#[allow(clippy::too_many_arguments)]
pub fn build_scale_ledger(
    window: &LrpWindow,
    n: u32,
    big_m: f64,
    big_l: f64,
    base: LogBase,
    alpha: f64,
    quantiles: &QuantileTable,
) -> Result<ScaleLedger> {
    if !(big_m > 2.0 && big_l > 2.0) {
        return Err(invalid(format!("need M > 2 and L > 2, got M = {big_m}, L = {big_l}")));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(invalid(format!("alpha must lie in (0, 1/2], got {alpha}")));
    }
    let (lo, hi) = ledger_window(n);
    if window.lo > lo || window.hi < hi {
        return Err(invalid(format!("ledger for n = {n} needs the window [{lo}, {hi}]")));
    }
    let schedule = ScaleSchedule::new(n, big_m, big_l, base)?;
    let gamma = alpha;
    let cp = c_prime(window.beta, gamma);
    let k0 = k0(big_m, big_l, base, cp)?;
    let z = inflow_points(window, n)?;
    let mut eta = vec![0u32; n as usize];
    for &v in &z[1..] {
        // v in (2^{l-1}, 2^l]
        let l = 64 - ((v - 1) as u64).leading_zeros();
        eta[l as usize - 1] += 1;
    }
    let f_holds = (*z.last().unwrap() as f64) <= cp * (1u64 << n) as f64;
    let mut ledger =
        ScaleLedger { n, beta: window.beta, alpha, gamma, schedule, k0, z, eta, records: Vec::new(), f_holds };
    for k in 1..=ledger.schedule.k_n {
        let thresholds: Vec<(u32, f64)> =
            ledger.schedule.band_scales(k).map(|j| Ok((j, quantiles.get(j)?))).collect::<Result<_>>()?;
        for i in ledger.demanded(k) {
            let zi = ledger.z[i];
            for &(j, a) in &thresholds {
                let good = is_good_pair(window, &GoodPairQuery::new(zi, j))?;
                let very_good = very_good_flags(window, zi, j, a, true)?;
                ledger.records.push(PairRecord { k, i, z: zi, j, good, very_good });
            }
        }
    }
    Ok(ledger)
}

/// Samples the ledger window for replica `replica` and builds its ledger.
#[allow(clippy::too_many_arguments)]
pub fn sample_ledger(
    params: &LrpParams,
    n: u32,
    big_m: f64,
    big_l: f64,
    base: LogBase,
    alpha: f64,
    quantiles: &QuantileTable,
    replica: u64,
) -> Result<ScaleLedger> {
    let (lo, hi) = ledger_window(n);
    let w = sample_window(params, lo, hi, &[], replica)?;
    build_scale_ledger(&w, n, big_m, big_l, base, alpha, quantiles)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub holds: bool,
    /// Per band `k`: `η̄_{b_{k-1},b_k} ≤ 2μ_{b_{k-1},b_k}`.
    pub count_ok: Vec<bool>,
    /// Per band `k`: every demanded inflow point has a very good pair.
    pub search_ok: Vec<bool>,
    /// `(k, i)` without a very good pair.
    pub missing: Vec<(usize, usize)>,
}

pub fn check_event_e(ledger: &ScaleLedger) -> EventReport {
    let kn = ledger.schedule.k_n;
    let count_ok: Vec<bool> = (1..=kn).map(|k| ledger.band_count(k) as f64 <= 2.0 * ledger.band_mean(k)).collect();
    let mut missing = Vec::new();
    let mut search_ok = Vec::with_capacity(kn);
    for k in 1..=kn {
        let mut ok = true;
        for i in ledger.demanded(k) {
            if !ledger.records.iter().any(|r| r.k == k && r.i == i && r.very_good.holds()) {
                missing.push((k, i));
                ok = false;
            }
        }
        search_ok.push(ok);
    }
    EventReport { holds: count_ok.iter().chain(&search_ok).all(|&b| b), count_ok, search_ok, missing }
}

/// `z_η̄ ≤ c' 2^n` with `c' = (1 + (1-γ/2)^{1/β})/2`.
pub fn check_event_f(window: &LrpWindow, n: u32, gamma: f64) -> Result<bool> {
    let z = inflow_points(window, n)?;
    Ok(*z.last().unwrap() as f64 <= c_prime(window.beta, gamma) * (1u64 << n) as f64)
}

/// Exact probability of `{z_η̄ ≤ c' 2^n}`.
pub fn event_f_probability(beta: f64, n: u32, gamma: f64) -> Result<f64> {
    let size = 1i64 << n;
    let first = (c_prime(beta, gamma) * size as f64).floor() as i64 + 1;
    if first > size {
        return Ok(1.0);
    }
    if first <= 1 {
        return Ok(0.0);
    }
    PairRect::new(Span::up_to(0), Span::new(first, size)).no_edge_probability(beta)
}

/// One CSV row per ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub n: u32,
    pub big_m: f64,
    pub big_l: f64,
    pub alpha: f64,
    pub k_n: usize,
    pub k0: usize,
    pub eta_bar: usize,
    pub e_holds: bool,
    pub f_holds: bool,
    pub very_good_per_band: Vec<usize>,
}

impl LedgerSummary {
    pub const CSV_HEADER: &'static str = "n,M,L,alpha,K_n,k0,eta_bar,E_holds,F_holds,very_good_per_band";

    pub fn csv_row(&self) -> String {
        let bands: Vec<String> = self.very_good_per_band.iter().map(|c| c.to_string()).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.big_m,
            self.big_l,
            self.alpha,
            self.k_n,
            self.k0,
            self.eta_bar,
            self.e_holds,
            self.f_holds,
            bands.join(";")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(lo: i64, hi: i64) -> LrpWindow {
        let p = LrpParams::new(1.0, 0).unwrap();
        sample_window(&p, lo, hi, &[PairRect::new(Span::all(), Span::all())], 0).unwrap()
    }

    #[test]
    fn bare_window_has_trivial_inflow() {
        let n = 4;
        let (lo, hi) = ledger_window(n);
        let w = bare(lo, hi);
        assert_eq!(inflow_points(&w, n).unwrap(), vec![1]);
        let t = QuantileTable::from_values(0.5, 1.0, (1..=n).map(|j| (j, 0.0)));
        let l = build_scale_ledger(&w, n, 2.05, 2.05, LogBase::Natural, 0.5, &t).unwrap();
        assert_eq!(l.eta_bar(), 0);
        let e = check_event_e(&l);
        assert!(e.count_ok.iter().all(|&b| b));
        assert!(l.f_holds);
        // z_0 = 1 is demanded in band 1 and the bare line makes every pair very good
        assert!(e.holds, "{e:?}");
    }

    #[test]
    fn missing_threshold_is_a_dependency_error() {
        let n = 4;
        let (lo, hi) = ledger_window(n);
        let w = bare(lo, hi);
        let t = QuantileTable::from_values(0.5, 1.0, [(1, 0.0)]);
        let err = build_scale_ledger(&w, n, 2.05, 2.05, LogBase::Natural, 0.5, &t).unwrap_err();
        assert!(matches!(err, crate::LrpError::Dependency(_)));
    }

    #[test]
    fn zero_threshold_reduces_to_the_edge_condition() {
        let p = LrpParams::new(1.0, 9).unwrap();
        let n = 5;
        let (lo, hi) = ledger_window(n);
        for rep in 0..10 {
            let w = sample_window(&p, lo, hi, &[], rep).unwrap();
            for &z in &inflow_points(&w, n).unwrap() {
                for j in 1..=n {
                    let f = very_good_flags(&w, z, j, 0.0, false).unwrap();
                    assert_eq!(f.holds(), f.no_shortcut);
                }
            }
        }
    }

    #[test]
    fn event_f_probability_matches_definition() {
        let p = event_f_probability(1.0, 6, 0.5).unwrap();
        // c' = 7/8, first excluded point 57
        let want = PairRect::new(Span::up_to(0), Span::new(57, 64)).no_edge_probability(1.0).unwrap();
        assert_eq!(p, want);
        assert!(p > 0.8 && p < 1.0);
    }

    #[test]
    fn csv_row_shape() {
        let s = LedgerSummary {
            n: 10,
            big_m: 2.05,
            big_l: 2.05,
            alpha: 0.5,
            k_n: 2,
            k0: 2,
            eta_bar: 5,
            e_holds: false,
            f_holds: true,
            very_good_per_band: vec![3, 1],
        };
        assert_eq!(s.csv_row().split(',').count(), LedgerSummary::CSV_HEADER.split(',').count());
    }
}
