//! Monte Carlo campaigns: quantile tables, exponent fits, the quantile
//! recursion, dominance between constrained resistances, scans and the
//! cut-edge baseline.

mod cutedge;
mod dominance;
mod fit;
mod quantiles;
mod recursion;
mod scans;

pub use cutedge::{
    cut_bonds, cut_lower_bound, cut_probability, cutedge_baseline, strict_cut_counts, CutEdgeReport, CutEdgeRow,
};
pub use dominance::{dominance_check, mirror_thin, DominanceReport};
pub use fit::{fit_exponent, fit_exponent_replicas, ExponentFit};
pub use quantiles::{
    empirical_quantile, estimate_quantiles, quantile_entry, quantile_index, sample_hat_n, QuantileEntry, QuantileTable,
    ReplicaSamples, BOOTSTRAP_RESAMPLES,
};
pub use recursion::{recursion_check, recursion_sum, RecursionReport, RecursionRow};
pub use scans::{box_exclusion, box_scan, fmt, point_scan, ScanKind, ScanResult, ScanRow, FIT_RESAMPLES};
