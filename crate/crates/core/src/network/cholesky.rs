//! Sparse Cholesky factorization (up-looking, elimination-tree driven) with a
//! geometric nested-dissection fill-reducing ordering.

use crate::error::{LrpError, Result};

const NONE: usize = usize::MAX;
const LEAF: usize = 64;

/// Symmetric matrix given by its diagonal and strictly-off-diagonal entries.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    pub n: usize,
    pub diag: Vec<f64>,
    /// `(i, j, a_ij)` with `i != j`; each unordered pair listed once.
    pub off: Vec<(usize, usize, f64)>,
}

impl SymmetricMatrix {
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            y[i] = self.diag[i] * x[i];
        }
        for &(i, j, a) in &self.off {
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.off {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }
}

/// Nested-dissection order for vertices laid out on a line at `positions`.
///
/// Splits at the median position; the separator is the smaller endpoint set
/// of the edges crossing the split. Small parts keep positional order.
pub fn nested_dissection(positions: &[i64], adj: &[Vec<usize>]) -> Vec<usize> {
    let n = positions.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| (positions[i], i));
    let mut part = vec![0u32; n];
    let mut next_id = 1u32;
    let mut out = Vec::with_capacity(n);
    dissect(&idx, adj, &mut part, &mut next_id, &mut out);
    out
}

fn dissect(set: &[usize], adj: &[Vec<usize>], part: &mut [u32], next: &mut u32, out: &mut Vec<usize>) {
    if set.len() <= LEAF {
        out.extend_from_slice(set);
        return;
    }
    let mid = set.len() / 2;
    let (left, right) = set.split_at(mid);
    let (lid, rid) = (*next, *next + 1);
    *next += 2;
    for &v in left {
        part[v] = lid;
    }
    for &v in right {
        part[v] = rid;
    }
    let mut lsep = Vec::new();
    let mut rsep = Vec::new();
    for &v in left {
        let mut crosses = false;
        for &w in &adj[v] {
            if part[w] == rid {
                crosses = true;
                rsep.push(w);
            }
        }
        if crosses {
            lsep.push(v);
        }
    }
    rsep.sort_unstable();
    rsep.dedup();
    let sep_id = *next;
    *next += 1;
    let sep = if lsep.len() <= rsep.len() { lsep } else { rsep };
    for &v in &sep {
        part[v] = sep_id;
    }
    let l: Vec<usize> = left.iter().copied().filter(|&v| part[v] == lid).collect();
    let r: Vec<usize> = right.iter().copied().filter(|&v| part[v] == rid).collect();
    dissect(&l, adj, part, next, out);
    dissect(&r, adj, part, next, out);
    let mut sep = sep;
    sep.sort_by_key(|&v| set.iter().position(|&x| x == v));
    out.extend(sep);
}

/// `P A Pᵀ = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl Cholesky {
    /// Factorizes `a` in the order `perm` (`perm[k]` is the original index
    /// eliminated k-th).
    pub fn factor(a: &SymmetricMatrix, perm: &[usize]) -> Result<Self> {
        let n = a.n;
        assert_eq!(perm.len(), n);
        let mut pinv = vec![0usize; n];
        for (k, &i) in perm.iter().enumerate() {
            pinv[i] = k;
        }
        // upper triangle of the permuted matrix, by column
        let mut cnt = vec![1usize; n];
        for &(i, j, _) in &a.off {
            let (pi, pj) = (pinv[i], pinv[j]);
            cnt[pi.max(pj)] += 1;
        }
        let mut cp = vec![0usize; n + 1];
        for k in 0..n {
            cp[k + 1] = cp[k] + cnt[k];
        }
        let mut ci = vec![0usize; cp[n]];
        let mut cx = vec![0f64; cp[n]];
        let mut fill = cp[..n].to_vec();
        for k in 0..n {
            ci[fill[k]] = k;
            cx[fill[k]] = a.diag[perm[k]];
            fill[k] += 1;
        }
        for &(i, j, v) in &a.off {
            let (pi, pj) = (pinv[i], pinv[j]);
            let (r, c) = (pi.min(pj), pi.max(pj));
            ci[fill[c]] = r;
            cx[fill[c]] = v;
            fill[c] += 1;
        }

        let parent = etree(n, &cp, &ci);
        let mut mark = vec![NONE; n];
        let mut stack = vec![0usize; n];
        let mut colcount = vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut mark, &mut stack);
            for &j in &stack[top..] {
                colcount[j] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + colcount[k];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0f64; nnz];
        let mut c = lp[..n].to_vec();
        let mut x = vec![0f64; n];
        mark.iter_mut().for_each(|m| *m = NONE);
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut mark, &mut stack);
            x[k] = 0.0;
            for p in cp[k]..cp[k + 1] {
                x[ci[p]] += cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &j in &stack[top..] {
                let lkj = x[j] / lx[lp[j]];
                x[j] = 0.0;
                for p in lp[j] + 1..c[j] {
                    x[li[p]] -= lx[p] * lkj;
                }
                d -= lkj * lkj;
                let p = c[j];
                c[j] += 1;
                li[p] = k;
                lx[p] = lkj;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LrpError::SolverFailure { iterations: k, residual: d });
            }
            let p = c[k];
            c[k] += 1;
            li[p] = k;
            lx[p] = d.sqrt();
        }
        Ok(Cholesky { n, perm: perm.to_vec(), lp, li, lx })
    }

    pub fn nnz(&self) -> usize {
        self.lp[self.n]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for j in 0..n {
            x[j] /= self.lx[self.lp[j]];
            let xj = x[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s / self.lx[self.lp[j]];
        }
        let mut out = vec![0f64; n];
        for (k, &i) in self.perm.iter().enumerate() {
            out[i] = x[k];
        }
        out
    }
}

fn etree(n: usize, cp: &[usize], ci: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for p in cp[k]..cp[k + 1] {
            let mut i = ci[p];
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Row pattern of `L[k, ..k]` in topological order, left in `stack[top..]`.
fn ereach(k: usize, cp: &[usize], ci: &[usize], parent: &[usize], mark: &mut [usize], stack: &mut [usize]) -> usize {
    let n = parent.len();
    let mut top = n;
    mark[k] = k;
    for p in cp[k]..cp[k + 1] {
        let mut i = ci[p];
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}
