use super::fit::{fit_exponent_replicas, ExponentFit};
use super::quantiles::{cell_seed, empirical_quantile, quantile_entry, ReplicaSamples};
use crate::error::{invalid, Result};
use crate::model::{sample_window, LrpParams, PairRect, Span};
use crate::network::{hat_resistance, Statistic};
use crate::rng::domain;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::time::Instant;

/// Bootstrap resamples for the exponent interval of a scan.
pub const FIT_RESAMPLES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Point,
    Box,
    Hat,
    Tilde,
}

impl ScanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanKind::Point => "point",
            ScanKind::Box => "box",
            ScanKind::Hat => "hat",
            ScanKind::Tilde => "tilde",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u32,
    pub size: i64,
    pub median: f64,
    pub median_lo: f64,
    pub median_hi: f64,
    pub q25: f64,
    pub q75: f64,
    pub replicas: usize,
    pub infinite: usize,
}

/// Medians by scale with a fitted growth exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub beta: f64,
    pub kind: ScanKind,
    pub seed: u64,
    pub rows: Vec<ScanRow>,
    pub fit: Option<ExponentFit>,
    pub fit_error: Option<String>,
    pub runtime_secs: f64,
    pub samples: ReplicaSamples,
}

impl ScanResult {
    fn build(
        beta: f64,
        kind: ScanKind,
        seed: u64,
        samples: ReplicaSamples,
        paired: bool,
        start: Instant,
    ) -> Result<Self> {
        let mut rows = Vec::new();
        for (&n, xs) in &samples.values {
            let med = quantile_entry(n, xs, 0.5, seed)?;
            rows.push(ScanRow {
                n,
                size: 1i64 << n,
                median: med.estimate.as_f64(),
                median_lo: med.lower.as_f64(),
                median_hi: med.upper.as_f64(),
                q25: empirical_quantile(xs, 0.25)?,
                q75: empirical_quantile(xs, 0.75)?,
                replicas: xs.len(),
                infinite: xs.iter().filter(|x| x.is_infinite()).count(),
            });
        }
        let (fit, fit_error) = match fit_exponent_replicas(&samples.values, 0.5, paired, FIT_RESAMPLES, seed) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(ScanResult { beta, kind, seed, rows, fit, fit_error, runtime_secs: start.elapsed().as_secs_f64(), samples })
    }

    /// Medians never drop by more than the sum of the two interval half-widths.
    pub fn medians_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].median >= w[0].median || w[1].median_hi >= w[0].median_lo)
    }

    pub const SUMMARY_HEADER: &'static str = "beta,kind,n,N,median,median_lo,median_hi,q25,q75,replicas,infinite";

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(Self::SUMMARY_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                self.beta,
                self.kind.as_str(),
                r.n,
                r.size,
                fmt(r.median),
                fmt(r.median_lo),
                fmt(r.median_hi),
                fmt(r.q25),
                fmt(r.q75),
                r.replicas,
                r.infinite
            ));
        }
        s
    }

    pub const REPLICA_HEADER: &'static str = "beta,n,kind,value_or_inf,seed,replica_id";

    pub fn replica_csv(&self) -> String {
        let mut s = String::from(Self::REPLICA_HEADER);
        s.push('\n');
        for (&n, xs) in &self.samples.values {
            for (i, x) in xs.iter().enumerate() {
                s.push_str(&format!("{},{},{},{},{},{}\n", self.beta, n, self.kind.as_str(), fmt(*x), self.seed, i));
            }
        }
        s
    }
}

/// Shortest round-trip formatting, `inf` for infinity.
pub fn fmt(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn check_range(n_range: &RangeInclusive<u32>, replicas: usize) -> Result<()> {
    if n_range.is_empty() || *n_range.end() > 24 {
        return Err(invalid(format!("scale range {n_range:?} must be nonempty and end at 24 or below")));
    }
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    Ok(())
}

/// `R(0, [-N, N]^c)` for `N = 2^n`, all scales read off one window
/// `[-2^{n_max}, 2^{n_max}]` per replica.
pub fn point_scan(beta: f64, n_range: RangeInclusive<u32>, replicas: usize, seed: u64, eps: f64) -> Result<ScanResult> {
    check_range(&n_range, replicas)?;
    let start = Instant::now();
    let top = 1i64 << n_range.end();
    let params = LrpParams::with_eps(beta, cell_seed(seed, domain::POINT, 0), eps)?;
    let per_rep: Result<Vec<Vec<f64>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let w = sample_window(&params, -top, top, &[], rep)?;
            n_range
                .clone()
                .map(|n| Ok(hat_resistance(&w, &Statistic::Point { size: 1i64 << n })?.value.as_f64()))
                .collect()
        })
        .collect();
    let per_rep = per_rep?;
    let mut values = BTreeMap::new();
    for (k, n) in n_range.clone().enumerate() {
        values.insert(n, per_rep.iter().map(|r| r[k]).collect());
    }
    ScanResult::build(beta, ScanKind::Point, seed, ReplicaSamples { beta, seed, values }, true, start)
}

/// The exclusion rectangles `[-N, N] × [-2N, 2N]^c`.
pub fn box_exclusion(size: i64) -> Vec<PairRect> {
    let inner = Span::new(-size, size);
    vec![PairRect::new(inner, Span::up_to(-2 * size - 1)), PairRect::new(inner, Span::from(2 * size + 1))]
}

/// `R([-N, N], [-2N, 2N]^c)` conditioned on no edge joining `[-N, N]` to
/// `[-2N, 2N]^c`, one window `[-2N, 2N]` per replica and scale.
pub fn box_scan(beta: f64, n_range: RangeInclusive<u32>, replicas: usize, seed: u64, eps: f64) -> Result<ScanResult> {
    check_range(&n_range, replicas)?;
    let start = Instant::now();
    let mut values = BTreeMap::new();
    for n in n_range {
        let size = 1i64 << n;
        let params = LrpParams::with_eps(beta, cell_seed(seed, domain::BOX, n), eps)?;
        let excluded = box_exclusion(size);
        let xs: Result<Vec<f64>> = (0..replicas as u64)
            .into_par_iter()
            .map(|rep| {
                let w = sample_window(&params, -2 * size, 2 * size, &excluded, rep)?;
                Ok(hat_resistance(&w, &Statistic::Box { size })?.value.as_f64())
            })
            .collect();
        values.insert(n, xs?);
    }
    ScanResult::build(beta, ScanKind::Box, seed, ReplicaSamples { beta, seed, values }, false, start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_scan_is_monotone_per_replica() {
        let r = point_scan(1.0, 1..=4, 30, 3, 1e-12).unwrap();
        let v = &r.samples.values;
        for rep in 0..30 {
            for n in 1..4 {
                assert!(v[&n][rep] <= v[&(n + 1)][rep] + 1e-9);
            }
        }
        // N = 2: at least the two nearest-neighbour paths in parallel
        assert!(v[&1].iter().all(|&x| x <= 1.5 + 1e-12));
        assert!(r.medians_nondecreasing());
    }

    #[test]
    fn smallest_point_case_is_at_most_one_half() {
        // sink {..., -1} ∪ {1, ...}: two unit bonds plus any long edges from 0
        let p = LrpParams::new(1.0, 5).unwrap();
        for rep in 0..20 {
            let w = sample_window(&p, -4, 4, &[], rep).unwrap();
            let r = hat_resistance(&w, &Statistic::Point { size: 0 }).unwrap().value.as_f64();
            assert!(r <= 0.5 + 1e-12);
            let r1 = hat_resistance(&w, &Statistic::Point { size: 1 }).unwrap().value.as_f64();
            assert!(r1 <= 1.0 + 1e-12 && r1 >= r);
        }
    }

    #[test]
    fn box_windows_respect_the_exclusion() {
        let p = LrpParams::new(2.0, 8).unwrap();
        let size = 8;
        let ex = box_exclusion(size);
        for rep in 0..20 {
            let w = sample_window(&p, -2 * size, 2 * size, &ex, rep).unwrap();
            assert!(w.edges().all(|(u, v)| !ex.iter().any(|r| r.contains(u, v)) || (u - v).abs() <= 1));
            assert!(!w.has_long_edge_between(&Span::new(-size, size), &Span::from(2 * size + 1)).unwrap());
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let a = point_scan(0.5, 2..=3, 10, 42, 1e-12).unwrap();
        let b = point_scan(0.5, 2..=3, 10, 42, 1e-12).unwrap();
        assert_eq!(a.replica_csv(), b.replica_csv());
        assert_eq!(a.summary_csv(), b.summary_csv());
        assert_eq!(a.replica_csv().lines().count(), 21);
    }
}
