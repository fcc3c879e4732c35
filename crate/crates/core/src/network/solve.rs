use super::cg::pcg;
use super::cholesky::{nested_dissection, Cholesky, SymmetricMatrix};
use super::flow::FlowField;
use super::{CondensedNetwork, Resistance, ResistanceResult, SINK, SOURCE};
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Largest number of unknowns factorized directly.
    pub direct_limit: usize,
    pub cg_tol: f64,
    /// Conjugate-gradient iteration cap, as a multiple of the unknown count.
    pub cg_iter_factor: usize,
    /// Build the unit flow and potentials.
    pub with_flow: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { direct_limit: 1 << 14, cg_tol: 1e-10, cg_iter_factor: 10, with_flow: true }
    }
}

pub fn effective_resistance(net: &CondensedNetwork) -> Result<ResistanceResult> {
    effective_resistance_with(net, &SolverOptions::default())
}

/// Effective resistance between the two supernodes.
///
/// Holds the source at potential 1 and the sink at 0, solves the grounded
/// Laplacian on the interior nodes joined to the terminals and returns
/// `1 / current`. Components that touch no terminal carry no current and are
/// left out.
pub fn effective_resistance_with(net: &CondensedNetwork, opts: &SolverOptions) -> Result<ResistanceResult> {
    let n = net.node_count();
    let reach = net.reachable_from(SOURCE);
    if !reach[SINK] {
        return Ok(ResistanceResult {
            value: Resistance::Infinite,
            flow: None,
            potentials: None,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut idx = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for v in 2..n {
        if reach[v] {
            idx[v] = unknowns.len();
            unknowns.push(v);
        }
    }
    let m = unknowns.len();
    let mut diag = vec![0.0; m];
    let mut off = Vec::new();
    let mut rhs = vec![0.0; m];
    let mut direct = 0.0;
    for &(u, v, c) in &net.edges {
        if !reach[u] {
            continue;
        }
        match (idx[u], idx[v]) {
            (usize::MAX, usize::MAX) => {
                if (u, v) == (SOURCE, SINK) {
                    direct += c;
                }
            }
            (iu, usize::MAX) => {
                diag[iu] += c;
                if v == SOURCE {
                    rhs[iu] += c;
                }
            }
            (usize::MAX, iv) => {
                diag[iv] += c;
                if u == SOURCE {
                    rhs[iv] += c;
                }
            }
            (iu, iv) => {
                diag[iu] += c;
                diag[iv] += c;
                off.push((iu, iv, -c));
            }
        }
    }
    let a = SymmetricMatrix { n: m, diag, off };
    let (phi, iterations) = if m == 0 {
        (Vec::new(), 0)
    } else if m <= opts.direct_limit {
        let pos: Vec<i64> = unknowns.iter().map(|&v| net.labels[v].unwrap_or(v as i64)).collect();
        let order = nested_dissection(&pos, &a.adjacency());
        (Cholesky::factor(&a, &order)?.solve(&rhs), 0)
    } else {
        let (x, it, _) = pcg(&a, &rhs, opts.cg_tol, opts.cg_iter_factor * m)?;
        (x, it)
    };
    let residual = if m == 0 {
        0.0
    } else {
        let mut ax = vec![0.0; m];
        a.mul(&phi, &mut ax);
        let bn = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rn = ax.iter().zip(&rhs).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        if bn > 0.0 {
            rn / bn
        } else {
            rn
        }
    };
    let potential = |v: usize| -> f64 {
        match v {
            SOURCE => 1.0,
            SINK => 0.0,
            _ if idx[v] != usize::MAX => phi[idx[v]],
            _ => f64::NAN,
        }
    };
    let mut current = direct;
    for &(u, v, c) in &net.edges {
        if u == SOURCE && v != SINK && reach[v] {
            current += c * (1.0 - potential(v));
        }
    }
    let r = 1.0 / current;
    let (flow, potentials) = if opts.with_flow {
        let mut fe = Vec::with_capacity(net.edges.len());
        for &(u, v, c) in &net.edges {
            if reach[u] {
                fe.push((u, v, c * (potential(u) - potential(v)) * r));
            }
        }
        let pot: Vec<f64> = (0..n).map(|v| if reach[v] { potential(v) * r } else { f64::NAN }).collect();
        (Some(FlowField::new(n, fe, SOURCE, SINK)), Some(pot))
    } else {
        (None, None)
    };
    Ok(ResistanceResult { value: Resistance::Finite(r), flow, potentials, iterations, residual })
}
