use super::{CondensedNetwork, Resistance, SINK, SOURCE};
use crate::error::{invalid, Result};

pub const MAX_DENSE_NODES: usize = 64;

/// Reference resistance by dense elimination: ground the sink, inject a unit
/// current at the source and read off the source potential. Gaussian
/// elimination with full pivoting, no iteration.
pub fn brute_force_resistance(net: &CondensedNetwork) -> Result<Resistance> {
    let n = net.node_count();
    if n > MAX_DENSE_NODES {
        return Err(invalid(format!("dense oracle is capped at {MAX_DENSE_NODES} nodes, got {n}")));
    }
    let reach = net.reachable_from(SOURCE);
    if !reach[SINK] {
        return Ok(Resistance::Infinite);
    }
    let keep: Vec<usize> = (0..n).filter(|&v| reach[v] && v != SINK).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in keep.iter().enumerate() {
        pos[v] = k;
    }
    let m = keep.len();
    let mut a = vec![vec![0.0f64; m]; m];
    for &(u, v, c) in &net.edges {
        if !reach[u] {
            continue;
        }
        for (x, y) in [(u, v), (v, u)] {
            if x != SINK {
                a[pos[x]][pos[x]] += c;
                if y != SINK {
                    a[pos[x]][pos[y]] -= c;
                }
            }
        }
    }
    let mut rhs = vec![0.0; m];
    rhs[pos[SOURCE]] = 1.0;
    let x = full_pivot_solve(a, rhs)?;
    Ok(Resistance::Finite(x[pos[SOURCE]]))
}

fn full_pivot_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    let mut col: Vec<usize> = (0..m).collect();
    for k in 0..m {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..m {
            for j in k..m {
                if a[i][j].abs() > best {
                    best = a[i][j].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best == 0.0 {
            return Err(invalid("singular grounded Laplacian"));
        }
        a.swap(k, pi);
        b.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        col.swap(k, pj);
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..m {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut y = vec![0.0; m];
    for k in (0..m).rev() {
        let mut s = b[k];
        for j in k + 1..m {
            s -= a[k][j] * y[j];
        }
        y[k] = s / a[k][k];
    }
    let mut x = vec![0.0; m];
    for k in 0..m {
        x[col[k]] = y[k];
    }
    Ok(x)
}
