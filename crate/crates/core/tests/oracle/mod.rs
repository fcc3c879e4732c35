//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use lrp_core::network::CondensedNetwork;
use lrp_core::rng::Rng;
use rand::Rng as _;

fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature on a finite interval.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `∫_a^b f`, where either bound may be infinite (mapped to `[0, 1)` by
/// `t ↦ t / (1 - t)`).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => simpson(f, a, b, tol),
        (true, false) => {
            let g = |t: f64| if t >= 1.0 { 0.0 } else { f(a + t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)) };
            simpson(&g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let g = |t: f64| if t >= 1.0 { 0.0 } else { f(b - t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)) };
            simpson(&g, 0.0, 1.0, tol)
        }
        (false, false) => panic!("at most one infinite bound"),
    }
}

/// `∬_{[a1,a2]×[b1,b2]} (u - v)^{-2}` by nested quadrature.
pub fn kernel_integral(a1: f64, a2: f64, b1: f64, b2: f64, tol: f64) -> f64 {
    let inner = |u: f64| integrate(&|v: f64| (u - v).powi(-2), b1, b2, tol * 1e-3);
    integrate(&inner, a1, a2, tol)
}

/// `p_d` from the Poisson kernel on the unit cell.
pub fn edge_probability(beta: f64, d: f64) -> f64 {
    let j = kernel_integral(0.0, 1.0, d, d + 1.0, 1e-13);
    -(-beta * j).exp_m1()
}

/// Effective resistance by a dense Laplacian solve restricted to the source
/// component (sink grounded, unit current in at the source).
pub fn dense_resistance(nodes: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v, _) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; nodes];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    if !seen[1] {
        return f64::INFINITY;
    }
    let idx: Vec<usize> = (0..nodes).filter(|&v| seen[v] && v != 1).collect();
    let mut pos = vec![usize::MAX; nodes];
    for (k, &v) in idx.iter().enumerate() {
        pos[v] = k;
    }
    let n = idx.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for &(u, v, c) in edges {
        if !seen[u] || u == v {
            continue;
        }
        for (x, y) in [(u, v), (v, u)] {
            if x != 1 {
                a[pos[x]][pos[x]] += c;
                if y != 1 {
                    a[pos[x]][pos[y]] -= c;
                }
            }
        }
    }
    a[pos[0]][n] = 1.0;
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x[pos[0]]
}

pub fn dense_of(net: &CondensedNetwork) -> f64 {
    dense_resistance(net.node_count(), &net.edges)
}

/// Random multigraph on `nodes` nodes with conductances in `[0.1, 10]`;
/// a spanning path keeps it connected when `connected` is set.
pub fn random_network(rng: &mut Rng, nodes: usize, extra: usize, connected: bool) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    let cond = |rng: &mut Rng| 10f64.powf(rng.random_range(-1.0..1.0));
    if connected {
        let mut order: Vec<usize> = (0..nodes).collect();
        for i in (1..nodes).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for w in order.windows(2) {
            let c = cond(rng);
            edges.push((w[0], w[1], c));
        }
    }
    for _ in 0..extra {
        let u = rng.random_range(0..nodes);
        let v = rng.random_range(0..nodes);
        if u != v {
            let c = cond(rng);
            edges.push((u, v, c));
        }
    }
    edges
}
