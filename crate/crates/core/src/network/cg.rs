use super::cholesky::SymmetricMatrix;
use crate::error::{LrpError, Result};

/// Jacobi-preconditioned conjugate gradients. Returns the solution, the
/// iteration count and the final relative residual.
pub fn pcg(a: &SymmetricMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, f64)> {
    let n = a.n;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let inv: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / bnorm;
        if res <= tol {
            return Ok((x, it, res));
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LrpError::SolverFailure { iterations: max_iter, residual: norm(&r) / bnorm })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_diagonally_dominant_system() {
        let n = 50;
        let off: Vec<_> = (0..n - 1).map(|i| (i, i + 1, -1.0)).collect();
        let a = SymmetricMatrix { n, diag: vec![3.0; n], off };
        let b = vec![1.0; n];
        let (x, _, res) = pcg(&a, &b, 1e-12, 500).unwrap();
        assert!(res <= 1e-12);
        let mut ax = vec![0.0; n];
        a.mul(&x, &mut ax);
        assert!(ax.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn reports_failure() {
        let n = 200;
        let off: Vec<_> = (0..n - 1).map(|i| (i, i + 1, -1.0)).collect();
        let mut diag = vec![2.0; n];
        diag[0] = 1.000001;
        let a = SymmetricMatrix { n, diag, off };
        let b = vec![1.0; n];
        assert!(matches!(pcg(&a, &b, 1e-14, 3), Err(LrpError::SolverFailure { iterations: 3, .. })));
    }
}
