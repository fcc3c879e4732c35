use super::quantiles::cell_seed;
use crate::error::{invalid, Result};
use crate::model::{p_edge, sample_window, LrpParams, LrpWindow, Span, RIGHT};
use crate::network::{hat_resistance, Statistic};
use crate::rng::{self, domain};
use crate::stats::{ks_one_sided, KsResult};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub beta: f64,
    pub n: u32,
    pub replicas: usize,
    pub significance: f64,
    /// `R̃_n` against `R̂([-N,0],(N,∞))` on independent samples.
    pub tilde_vs_mid: KsResult,
    /// `R̂([-N,0],(N,∞))` against `R̂_n` on independent samples.
    pub mid_vs_hat: KsResult,
    /// `R̃_n` against `R̂_n` on independent samples.
    pub tilde_vs_hat: KsResult,
    /// Replicas with `R̂([-N,0],(N,∞)) < R̂_n` in one environment.
    pub pathwise_violations: usize,
    /// Replicas where the mirrored coupling gave `R̃' < R̂'`.
    pub coupling_violations: usize,
    /// Replicas with `R̃_n = ∞`.
    pub tilde_infinite: usize,
}

impl DominanceReport {
    pub fn passes(&self) -> bool {
        self.tilde_vs_mid.p_value >= self.significance
            && self.mid_vs_hat.p_value >= self.significance
            && self.tilde_vs_hat.p_value >= self.significance
            && self.pathwise_violations == 0
            && self.coupling_violations == 0
    }
}

fn mid(size: i64) -> Statistic {
    Statistic::Hat { source: Span::new(-size, 0), sink: Span::from(size + 1) }
}

/// Thins the edges from `(0, N]` into `(N, ∞)`: `⟨i, m⟩` survives with
/// probability `p_{m+i} / p_{m-i}`, so survivors have the law of the mirror
/// images of the edges from `(0, N]` into `(-∞, -N)`.
pub fn mirror_thin(window: &LrpWindow, size: i64, rng: &mut rng::Rng) -> LrpWindow {
    let mut w = window.clone();
    let beta = w.beta;
    if let Some(region) = w.boundary.iter_mut().find(|r| r.id == RIGHT) {
        region.edges.retain(|&(i, m)| {
            if i < 1 || i > size {
                return true;
            }
            let keep = p_edge(beta, (m + i) as u64) / p_edge(beta, (m - i) as u64);
            rng.random::<f64>() < keep
        });
    }
    w
}

/// Stochastic ordering `R̃_n ⪰ R̂([-N,0],(N,∞)) ⪰ R̂_n` at `N = 2^n`.
pub fn dominance_check(beta: f64, n: u32, replicas: usize, seed: u64, eps: f64) -> Result<DominanceReport> {
    if replicas < 2 {
        return Err(invalid("need at least two replicas"));
    }
    let size = 1i64 << n;
    let sample = |tag: u32, stat: Statistic| -> Result<Vec<f64>> {
        let params = LrpParams::with_eps(beta, cell_seed(seed, domain::DOMINANCE, tag), eps)?;
        (0..replicas as u64)
            .into_par_iter()
            .map(|rep| Ok(hat_resistance(&sample_window(&params, -size, size, &[], rep)?, &stat)?.value.as_f64()))
            .collect()
    };
    let tilde = sample(1, Statistic::Tilde { size })?;
    let middle = sample(2, mid(size))?;
    let hat = sample(3, Statistic::HatN { size })?;

    let params = LrpParams::with_eps(beta, cell_seed(seed, domain::DOMINANCE, 4), eps)?;
    let shared: Result<Vec<(bool, bool)>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let w = sample_window(&params, -size, size, &[], rep)?;
            let m = hat_resistance(&w, &mid(size))?.value.as_f64();
            let h = hat_resistance(&w, &Statistic::HatN { size })?.value.as_f64();
            let mut g = rng::stream(params.seed, domain::DOMINANCE, rep);
            let thinned = mirror_thin(&w, size, &mut g);
            let t = hat_resistance(&thinned, &mid(size))?.value.as_f64();
            Ok((m < h * (1.0 - 1e-9), t < m * (1.0 - 1e-9)))
        })
        .collect();
    let shared = shared?;
    Ok(DominanceReport {
        beta,
        n,
        replicas,
        significance: 0.01,
        tilde_vs_mid: ks_one_sided(&tilde, &middle),
        mid_vs_hat: ks_one_sided(&middle, &hat),
        tilde_vs_hat: ks_one_sided(&tilde, &hat),
        pathwise_violations: shared.iter().filter(|s| s.0).count(),
        coupling_violations: shared.iter().filter(|s| s.1).count(),
        tilde_infinite: tilde.iter().filter(|x| x.is_infinite()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_only_removes_right_edges() {
        let p = LrpParams::new(1.0, 2).unwrap();
        let w = sample_window(&p, -16, 16, &[], 0).unwrap();
        let mut g = rng::stream(1, 2, 3);
        let t = mirror_thin(&w, 16, &mut g);
        assert_eq!(t.long_edges, w.long_edges);
        let before = w.region(RIGHT).unwrap().edges.clone();
        let after = &t.region(RIGHT).unwrap().edges;
        assert!(after.iter().all(|e| before.contains(e)));
    }

    #[test]
    fn small_run_is_consistent() {
        let r = dominance_check(1.0, 3, 60, 5, 1e-12).unwrap();
        assert_eq!(r.pathwise_violations, 0);
        assert_eq!(r.coupling_violations, 0);
    }
}
