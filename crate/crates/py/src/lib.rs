//! Python bindings: `import lrp`.

use lrp_core::experiments as exp;
use lrp_core::firework;
use lrp_core::model::{self, LrpParams, LrpWindow, Span};
use lrp_core::multiscale::{self, LogBase};
use lrp_core::network::{self, CondensedNetwork, Statistic};
use lrp_core::LrpError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::collections::BTreeMap;

fn py_err(e: LrpError) -> PyErr {
    match e {
        LrpError::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// `P[u ~ v]` for `|u - v| = d`.
#[pyfunction]
fn edge_probability(beta: f64, d: i64) -> PyResult<f64> {
    model::edge_probability(&LrpParams::new(beta, 0).map_err(py_err)?, d).map_err(py_err)
}

/// `∬ (u - v)^{-2}` over `[a1, a2] × [b1, b2]`; outer bounds may be infinite.
#[pyfunction]
fn rect_integral(a1: f64, a2: f64, b1: f64, b2: f64) -> PyResult<f64> {
    model::rect_integral(a1, a2, b1, b2).map_err(py_err)
}

fn statistic(name: &str, size: i64) -> PyResult<Statistic> {
    Ok(match name {
        "point" => Statistic::Point { size },
        "box" => Statistic::Box { size },
        "hat" => Statistic::HatN { size },
        "tilde" => Statistic::Tilde { size },
        "hat_mid" => Statistic::Hat { source: Span::new(-size, 0), sink: Span::from(size + 1) },
        _ => return Err(PyValueError::new_err(format!("unknown statistic {name:?}"))),
    })
}

/// One sampled environment on `[lo, hi]` with its boundary edges.
#[pyclass(name = "Window", frozen)]
struct PyWindow {
    inner: LrpWindow,
}

#[pymethods]
impl PyWindow {
    #[staticmethod]
    #[pyo3(signature = (beta, lo, hi, seed, replica = 0, eps = 1e-12))]
    fn sample(beta: f64, lo: i64, hi: i64, seed: u64, replica: u64, eps: f64) -> PyResult<Self> {
        let p = LrpParams::with_eps(beta, seed, eps).map_err(py_err)?;
        Ok(PyWindow { inner: model::sample_window(&p, lo, hi, &[], replica).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyWindow { inner: LrpWindow::from_json(&v).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn lo(&self) -> i64 {
        self.inner.lo
    }

    #[getter]
    fn hi(&self) -> i64 {
        self.inner.hi
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    /// Long edges inside the window as `(u, v)` with `u < v`.
    #[getter]
    fn long_edges(&self) -> Vec<(i64, i64)> {
        self.inner.long_edges.iter().map(|e| (e.lo, e.hi)).collect()
    }

    /// Boundary edges as `(window vertex, far endpoint)`.
    #[getter]
    fn boundary_edges(&self) -> Vec<(i64, i64)> {
        self.inner.boundary.iter().flat_map(|r| r.edges.iter().copied()).collect()
    }

    /// Resistance of `stat` ("point", "box", "hat", "tilde", "hat_mid") at
    /// size `N`; `inf` when the terminals are disconnected.
    fn resistance(&self, stat: &str, size: i64) -> PyResult<f64> {
        Ok(network::hat_resistance(&self.inner, &statistic(stat, size)?).map_err(py_err)?.value.as_f64())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Window(lo={}, hi={}, beta={}, long_edges={})",
            self.inner.lo,
            self.inner.hi,
            self.inner.beta,
            self.inner.long_edges.len()
        )
    }
}

/// Effective resistance between node 0 and node 1 of a weighted graph given
/// as `(u, v, conductance)` triples.
#[pyfunction]
fn effective_resistance(nodes: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<f64> {
    let net = CondensedNetwork::from_edges(nodes, &edges).map_err(py_err)?;
    Ok(network::effective_resistance(&net).map_err(py_err)?.value.as_f64())
}

/// Medians by scale and the fitted growth exponent of a scan.
#[pyclass(name = "ScanResult", frozen)]
struct PyScanResult {
    inner: exp::ScanResult,
}

#[pymethods]
impl PyScanResult {
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    /// `(n, median, median_lo, median_hi)` per scale.
    #[getter]
    fn medians(&self) -> Vec<(u32, f64, f64, f64)> {
        self.inner.rows.iter().map(|r| (r.n, r.median, r.median_lo, r.median_hi)).collect()
    }

    #[getter]
    fn delta(&self) -> Option<f64> {
        self.inner.fit.map(|f| f.delta)
    }

    #[getter]
    fn delta_ci(&self) -> Option<(f64, f64)> {
        self.inner.fit.map(|f| f.ci)
    }

    fn medians_nondecreasing(&self) -> bool {
        self.inner.medians_nondecreasing()
    }

    fn summary_csv(&self) -> String {
        self.inner.summary_csv()
    }

    fn replica_csv(&self) -> String {
        self.inner.replica_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }
}

#[pyfunction]
#[pyo3(signature = (beta, n_min, n_max, replicas, seed, eps = 1e-12))]
fn point_scan(
    py: Python<'_>,
    beta: f64,
    n_min: u32,
    n_max: u32,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> PyResult<PyScanResult> {
    let r = py.detach(|| exp::point_scan(beta, n_min..=n_max, replicas, seed, eps)).map_err(py_err)?;
    Ok(PyScanResult { inner: r })
}

#[pyfunction]
#[pyo3(signature = (beta, n_min, n_max, replicas, seed, eps = 1e-12))]
fn box_scan(
    py: Python<'_>,
    beta: f64,
    n_min: u32,
    n_max: u32,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> PyResult<PyScanResult> {
    let r = py.detach(|| exp::box_scan(beta, n_min..=n_max, replicas, seed, eps)).map_err(py_err)?;
    Ok(PyScanResult { inner: r })
}

/// Empirical `α`-quantiles of the restricted resistance, by scale.
#[pyfunction]
#[pyo3(signature = (beta, alpha, n_min, n_max, replicas, seed, eps = 1e-12))]
fn estimate_quantiles(
    py: Python<'_>,
    beta: f64,
    alpha: f64,
    n_min: u32,
    n_max: u32,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> PyResult<BTreeMap<u32, f64>> {
    let t = py.detach(|| exp::estimate_quantiles(beta, alpha, n_min..=n_max, replicas, seed, eps)).map_err(py_err)?;
    Ok(t.entries.iter().map(|(&n, e)| (n, e.estimate.as_f64())).collect())
}

/// `α`-lower empirical quantile; infinities rank last.
#[pyfunction]
fn empirical_quantile(values: Vec<f64>, alpha: f64) -> PyResult<f64> {
    exp::empirical_quantile(&values, alpha).map_err(py_err)
}

/// `(n, K_n, S_n, a_n, ratio)` rows of the recursion check; `ratio` is
/// `None` when `K_n < 2`.
#[pyfunction]
#[pyo3(signature = (quantiles, n_values, big_m = 2.05, big_l = 2.05, alpha = 0.5))]
fn recursion_check(
    quantiles: BTreeMap<u32, f64>,
    n_values: Vec<u32>,
    big_m: f64,
    big_l: f64,
    alpha: f64,
) -> PyResult<Vec<(u32, usize, f64, f64, Option<f64>)>> {
    let table = exp::QuantileTable::from_values(alpha, f64::NAN, quantiles);
    let r = exp::recursion_check(&table, big_m, big_l, LogBase::Natural, &n_values).map_err(py_err)?;
    Ok(r.rows.iter().map(|x| (x.n, x.k_n, x.s_n, x.a_n, x.ratio)).collect())
}

/// Exact probability that the dyadic pair at scale `i` is good.
#[pyfunction]
fn good_pair_probability(beta: f64, i: u32) -> PyResult<f64> {
    multiscale::good_pair_probability(beta, i).map_err(py_err)
}

/// `(frequency, exact, sigma)` from sampled windows.
#[pyfunction]
#[pyo3(signature = (beta, i, replicas, seed, eps = 1e-12))]
fn good_pair_frequency(
    py: Python<'_>,
    beta: f64,
    i: u32,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> PyResult<(f64, f64, f64)> {
    let r = py.detach(|| multiscale::good_pair_frequency(beta, i, replicas, seed, eps)).map_err(py_err)?;
    Ok((r.frequency, r.exact, r.sigma))
}

/// Exact law of `M_r` (index `m - 1`) for the scale set `s`.
#[pyfunction]
fn spread_law(beta: f64, s: Vec<u32>) -> PyResult<Vec<f64>> {
    firework::brute_force_spread(beta, &s).map_err(py_err)
}

/// `(kappa, (lo, hi))` for the decay of `P[M_r <= 1]` over `r_min..=r_max`.
#[pyfunction]
#[pyo3(signature = (beta, r_min, r_max, replicas, seed, first_scale = 5, scale_gap = 1))]
fn firework_decay(
    py: Python<'_>,
    beta: f64,
    r_min: usize,
    r_max: usize,
    replicas: usize,
    seed: u64,
    first_scale: u32,
    scale_gap: u32,
) -> PyResult<Option<(f64, (f64, f64))>> {
    let d = py
        .detach(|| firework::decay_campaign(beta, r_min..=r_max, first_scale, scale_gap, replicas, seed))
        .map_err(py_err)?;
    Ok(d.kappa())
}

/// Dominance report as JSON.
#[pyfunction]
#[pyo3(signature = (beta, n, replicas, seed, eps = 1e-12))]
fn dominance_check(py: Python<'_>, beta: f64, n: u32, replicas: usize, seed: u64, eps: f64) -> PyResult<String> {
    to_json(&py.detach(|| exp::dominance_check(beta, n, replicas, seed, eps)).map_err(py_err)?)
}

/// Cut-edge report as JSON.
#[pyfunction]
#[pyo3(signature = (beta, n_min, n_max, replicas, seed, eps = 1e-12))]
fn cutedge_baseline(
    py: Python<'_>,
    beta: f64,
    n_min: u32,
    n_max: u32,
    replicas: usize,
    seed: u64,
    eps: f64,
) -> PyResult<String> {
    to_json(&py.detach(|| exp::cutedge_baseline(beta, n_min..=n_max, replicas, seed, eps)).map_err(py_err)?)
}

#[pymodule]
fn lrp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWindow>()?;
    m.add_class::<PyScanResult>()?;
    m.add_function(wrap_pyfunction!(edge_probability, m)?)?;
    m.add_function(wrap_pyfunction!(rect_integral, m)?)?;
    m.add_function(wrap_pyfunction!(effective_resistance, m)?)?;
    m.add_function(wrap_pyfunction!(point_scan, m)?)?;
    m.add_function(wrap_pyfunction!(box_scan, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_quantiles, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(recursion_check, m)?)?;
    m.add_function(wrap_pyfunction!(good_pair_probability, m)?)?;
    m.add_function(wrap_pyfunction!(good_pair_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(spread_law, m)?)?;
    m.add_function(wrap_pyfunction!(firework_decay, m)?)?;
    m.add_function(wrap_pyfunction!(dominance_check, m)?)?;
    m.add_function(wrap_pyfunction!(cutedge_baseline, m)?)?;
    Ok(())
}
