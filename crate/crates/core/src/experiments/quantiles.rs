use crate::error::{invalid, LrpError, Result};
use crate::model::{sample_window, LrpParams};
use crate::network::{hat_resistance, Resistance, Statistic};
use crate::rng::{self, domain};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Bootstrap resamples used for quantile intervals.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// The `α`-lower empirical quantile: the largest order statistic `a` with
/// at least `⌈(1-α)m⌉` of the values `≥ a`. Infinities sort last.
pub fn empirical_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(LrpError::InsufficientData("no values".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[quantile_index(v.len(), alpha)])
}

/// Zero-based index of the order statistic used by [`empirical_quantile`].
pub fn quantile_index(m: usize, alpha: f64) -> usize {
    let keep = ((1.0 - alpha) * m as f64 - 1e-9).ceil().max(1.0) as usize;
    m - keep.min(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEntry {
    pub n: u32,
    pub estimate: Resistance,
    pub lower: Resistance,
    pub upper: Resistance,
    pub replicas: usize,
    /// Every sampled value was infinite.
    pub all_infinite: bool,
}

/// Empirical `(1-α)`-quantiles `â_{α,n}` of `R̂_n` by scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub alpha: f64,
    pub entries: BTreeMap<u32, QuantileEntry>,
    pub seed: u64,
    pub beta: f64,
    pub big_m: Option<f64>,
    pub big_l: Option<f64>,
}

impl QuantileTable {
    pub fn new(alpha: f64, beta: f64, seed: u64) -> Self {
        QuantileTable { alpha, entries: BTreeMap::new(), seed, beta, big_m: None, big_l: None }
    }

    /// Quantile estimates computed on stored samples, one entry per scale.
    pub fn from_samples(alpha: f64, samples: &ReplicaSamples) -> Result<Self> {
        let mut t = QuantileTable::new(alpha, samples.beta, samples.seed);
        for (&n, values) in &samples.values {
            t.entries.insert(n, quantile_entry(n, values, alpha, samples.seed)?);
        }
        Ok(t)
    }

    /// A table with the given estimates and zero-width intervals.
    pub fn from_values(alpha: f64, beta: f64, values: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut t = QuantileTable::new(alpha, beta, 0);
        for (n, a) in values {
            let r = Resistance::from_f64(a);
            t.entries.insert(
                n,
                QuantileEntry { n, estimate: r, lower: r, upper: r, replicas: 0, all_infinite: a.is_infinite() },
            );
        }
        t
    }

    pub fn with_provenance(mut self, big_m: f64, big_l: f64) -> Self {
        self.big_m = Some(big_m);
        self.big_l = Some(big_l);
        self
    }

    /// `â_{α,j}`; a missing scale is a dependency error.
    pub fn get(&self, j: u32) -> Result<f64> {
        self.entries
            .get(&j)
            .map(|e| e.estimate.as_f64())
            .ok_or_else(|| LrpError::Dependency(format!("quantile table has no entry for scale {j}")))
    }

    pub fn scales(&self) -> Vec<u32> {
        self.entries.keys().copied().collect()
    }
}

/// Computes one entry: point estimate plus a percentile bootstrap interval,
/// widened if needed so that it brackets the estimate.
pub fn quantile_entry(n: u32, values: &[f64], alpha: f64, seed: u64) -> Result<QuantileEntry> {
    let est = empirical_quantile(values, alpha)?;
    let m = values.len();
    let mut rng = rng::stream(seed, domain::BOOTSTRAP, n as u64);
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut buf = vec![0.0; m];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for x in buf.iter_mut() {
            *x = values[rng.random_range(0..m)];
        }
        buf.sort_by(f64::total_cmp);
        boot.push(buf[quantile_index(m, alpha)]);
    }
    boot.sort_by(f64::total_cmp);
    let lo = boot[(0.025 * BOOTSTRAP_RESAMPLES as f64) as usize].min(est);
    let hi = boot[((0.975 * BOOTSTRAP_RESAMPLES as f64) as usize).min(BOOTSTRAP_RESAMPLES - 1)].max(est);
    Ok(QuantileEntry {
        n,
        estimate: Resistance::from_f64(est),
        lower: Resistance::from_f64(lo),
        upper: Resistance::from_f64(hi),
        replicas: m,
        all_infinite: values.iter().all(|x| x.is_infinite()),
    })
}

/// Raw replica values by scale, in replica order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicaSamples {
    pub beta: f64,
    pub seed: u64,
    #[serde(with = "inf_values")]
    pub values: BTreeMap<u32, Vec<f64>>,
}

impl ReplicaSamples {
    /// Appends the replicas of `other`; both stores must describe the same model.
    pub fn merge(&mut self, other: &ReplicaSamples) -> Result<()> {
        if self.beta != other.beta {
            return Err(invalid("cannot merge samples taken at different beta"));
        }
        for (n, v) in &other.values {
            self.values.entry(*n).or_default().extend_from_slice(v);
        }
        Ok(())
    }
}

mod inf_values {
    use crate::network::Resistance;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(v: &BTreeMap<u32, Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<u32, Vec<Resistance>> =
            v.iter().map(|(k, xs)| (*k, xs.iter().map(|&x| Resistance::from_f64(x)).collect())).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, Vec<f64>>, D::Error> {
        let m: BTreeMap<u32, Vec<Resistance>> = BTreeMap::deserialize(d)?;
        Ok(m.into_iter().map(|(k, xs)| (k, xs.iter().map(|r| r.as_f64()).collect())).collect())
    }
}

/// Seed of the model stream used for one campaign cell.
pub(crate) fn cell_seed(root: u64, domain: u64, n: u32) -> u64 {
    rng::derive(rng::derive(root, domain), n as u64)
}

/// Samples `R̂_n` for `N = 2^n` on the window `[1, N]`.
pub fn sample_hat_n(
    beta: f64,
    n_range: std::ops::RangeInclusive<u32>,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> Result<ReplicaSamples> {
    let mut out = ReplicaSamples { beta, seed, values: BTreeMap::new() };
    for n in n_range {
        if n > 30 {
            return Err(invalid(format!("scale {n} is beyond the supported range")));
        }
        let size = 1i64 << n;
        let params = LrpParams::with_eps(beta, cell_seed(seed, domain::QUANTILE, n), eps)?;
        let values: Result<Vec<f64>> = (0..replicas as u64)
            .into_par_iter()
            .map(|rep| {
                let w = sample_window(&params, 1, size, &[], rep)?;
                Ok(hat_resistance(&w, &Statistic::HatN { size })?.value.as_f64())
            })
            .collect();
        out.values.insert(n, values?);
    }
    Ok(out)
}

/// Samples `R̂_n` over `n_range` and tabulates the `(1-α)`-quantiles.
pub fn estimate_quantiles(
    beta: f64,
    alpha: f64,
    n_range: std::ops::RangeInclusive<u32>,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> Result<QuantileTable> {
    if replicas < 100 {
        return Err(invalid(format!("need at least 100 replicas per scale, got {replicas}")));
    }
    QuantileTable::from_samples(alpha, &sample_hat_n(beta, n_range, replicas, seed, eps)?)
}
