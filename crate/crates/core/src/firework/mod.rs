//! The spreading ("firework") process behind the joint failure bound for
//! good pairs: reach variables `L_k`, spreading sets `A_m` and the lowest
//! covered index `M_r`.

mod campaign;

pub use campaign::{
    decay_campaign, m_r_histogram, reach_tail_check, scale_set, DecayReport, DecayRow, HistogramReport, TailRow,
};

use crate::error::{invalid, Result};
use crate::model::{sample_rect_points, PairRect, Span};
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Largest `r` handled by [`brute_force_spread`].
pub const MAX_EXACT_R: usize = 5;

fn check_set(s: &[u32]) -> Result<()> {
    if s.is_empty() {
        return Err(invalid("scale set must be nonempty"));
    }
    if s[0] == 0 || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!("scale set {s:?} must be strictly increasing and start at 1 or more")));
    }
    if *s.last().unwrap() > 55 {
        return Err(invalid("scales above 55 are not supported"));
    }
    Ok(())
}

/// Left and right blocks of spreader `k`; `k = r + 1` is unbounded.
fn blocks(s: &[u32], k: usize) -> (Span, Span) {
    let r = s.len();
    let inner = 1i64 << (s[k - 2] + 1);
    if k == r + 1 {
        (Span::up_to(-inner - 1), Span::from(inner + 1))
    } else {
        let outer = 1i64 << (s[k - 1] + 1);
        (Span::new(-outer, -inner - 1), Span::new(inner + 1, outer))
    }
}

/// Neighbourhoods of pair `s` (1-based) reached from the left and right.
fn neighbourhoods(s: &[u32], idx: usize) -> (Span, Span) {
    let i = s[idx - 1];
    let (a, b) = (1i64 << i, 1i64 << (i + 1));
    (Span::new(-a, b), Span::new(-b, a))
}

/// `Q_t = P[no edge from block k into the neighbourhood of pair t]`, for
/// `t = 0..k-1` (`Q_0 = 1`).
pub fn reach_survival(beta: f64, s: &[u32], k: usize) -> Result<Vec<f64>> {
    check_set(s)?;
    if k < 2 || k > s.len() + 1 {
        return Err(invalid(format!("spreader index {k} outside [2, {}]", s.len() + 1)));
    }
    let (bl, br) = blocks(s, k);
    let mut q = vec![1.0];
    for t in 1..k {
        let (nl, nr) = neighbourhoods(s, t);
        let j = PairRect::new(bl, nl).long_edge_integral()? + PairRect::new(br, nr).long_edge_integral()?;
        q.push((-beta * j).exp());
    }
    Ok(q)
}

/// Law of `L_k` on `0..=k-1`.
pub fn reach_law(beta: f64, s: &[u32], k: usize) -> Result<Vec<f64>> {
    let q = reach_survival(beta, s, k)?;
    let mut p = vec![0.0; k];
    p[0] = q[k - 1];
    // L_k = k - t where t is the first reached neighbourhood
    for t in 1..k {
        p[k - t] = q[t - 1] - q[t];
    }
    Ok(p)
}

/// `P[L_k > s]`.
pub fn reach_tail(beta: f64, set: &[u32], k: usize, s: usize) -> Result<f64> {
    let law = reach_law(beta, set, k)?;
    Ok(law.iter().skip(s + 1).sum())
}

/// The bound `1 - (1 - 3/(2^{s+1}+2))^{2β}` on `P[L_k > s]`.
pub fn reach_tail_bound(beta: f64, s: u32) -> f64 {
    1.0 - (1.0 - 3.0 / (2f64.powi(s as i32 + 1) + 2.0)).powf(2.0 * beta)
}

/// Draws `L_k` by inverting its distribution function.
pub fn sample_reach(beta: f64, s: &[u32], k: usize, rng: &mut Rng) -> Result<u32> {
    let q = reach_survival(beta, s, k)?;
    let u: f64 = rng.random();
    // P[first reached neighbourhood ≤ t] = 1 - Q_t
    for (t, &qt) in q.iter().enumerate().skip(1) {
        if u < 1.0 - qt {
            return Ok((k - t) as u32);
        }
    }
    Ok(0)
}

/// `α̃(s) = (1 - 3/(2^{s+1}+2))^{2β}`, the dominating reach law.
pub fn dominated_cdf(beta: f64, s: u32) -> f64 {
    1.0 - reach_tail_bound(beta, s)
}

/// Draws from `α̃`; the support is unbounded.
pub fn sample_dominated_reach(beta: f64, rng: &mut Rng) -> u32 {
    let u: f64 = rng.random();
    let mut s = 0;
    while u > dominated_cdf(beta, s) && s < 1000 {
        s += 1;
    }
    s
}

/// One run of the spreading process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadState {
    pub r: usize,
    pub s: Vec<u32>,
    /// `L_2, …, L_{r+1}`.
    pub reach: Vec<u32>,
    /// `A_0, A_1, …` as 1-based indices; `A_0 = {r+1}`.
    pub layers: Vec<Vec<usize>>,
    pub m_r: usize,
}

impl SpreadState {
    pub fn covered(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.layers.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// Spreads from `r + 1` given `reach[k-2] = L_k`; spreader `k` covers
/// `k - L_k, …, k - 1`. Returns the layers and `M_r`.
pub fn spread(reach: &[u32]) -> (Vec<Vec<usize>>, usize) {
    let r = reach.len();
    let mut seen = vec![false; r + 2];
    seen[r + 1] = true;
    let mut layers = vec![vec![r + 1]];
    loop {
        let mut next = Vec::new();
        for &k in layers.last().unwrap() {
            if k < 2 {
                continue;
            }
            let l = (reach[k - 2] as usize).min(k - 1);
            for t in (k - l)..k {
                if !seen[t] {
                    seen[t] = true;
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        layers.push(next);
    }
    let m_r = (1..=r + 1).find(|&k| seen[k]).unwrap();
    (layers, m_r)
}

/// Samples every `L_k` independently and runs the process.
pub fn run_spread(beta: f64, s: &[u32], rng: &mut Rng) -> Result<SpreadState> {
    check_set(s)?;
    let r = s.len();
    let reach = (2..=r + 1).map(|k| sample_reach(beta, s, k, rng)).collect::<Result<Vec<_>>>()?;
    let (layers, m_r) = spread(&reach);
    Ok(SpreadState { r, s: s.to_vec(), reach, layers, m_r })
}

/// The same process driven by i.i.d. reaches from `α̃`.
pub fn run_dominated_spread(beta: f64, r: usize, rng: &mut Rng) -> (Vec<u32>, usize) {
    let reach: Vec<u32> = (0..r).map(|_| sample_dominated_reach(beta, rng)).collect();
    let m = spread(&reach).1;
    (reach, m)
}

/// Exact law of `M_r` on `1..=r+1` (stored at `M_r - 1`) by enumerating
/// every reach vector.
pub fn brute_force_spread(beta: f64, s: &[u32]) -> Result<Vec<f64>> {
    check_set(s)?;
    let r = s.len();
    if r > MAX_EXACT_R {
        return Err(invalid(format!("exact enumeration supports r <= {MAX_EXACT_R}, got {r}")));
    }
    let laws: Vec<Vec<f64>> = (2..=r + 1).map(|k| reach_law(beta, s, k)).collect::<Result<_>>()?;
    let mut dist = vec![0.0; r + 1];
    let mut reach = vec![0u32; r];
    loop {
        let p: f64 = reach.iter().zip(&laws).map(|(&l, law)| law[l as usize]).product();
        if p > 0.0 {
            dist[spread(&reach).1 - 1] += p;
        }
        // odometer over L_k in 0..=k-1
        let mut pos = 0;
        loop {
            if pos == r {
                return Ok(dist);
            }
            reach[pos] += 1;
            if (reach[pos] as usize) < pos + 2 {
                break;
            }
            reach[pos] = 0;
            pos += 1;
        }
    }
}

/// A spread run coupled with the good-pair indicators of the same edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSample {
    pub state: SpreadState,
    /// `ξ_{i_t} = 0` (pair `t` covered by a long edge), for `t = 1..=r`.
    pub covered: Vec<bool>,
}

/// Samples the long edges from each block into the widest neighbourhood it
/// can reach and reads off both `L_k` and the `ξ_{i_t}`.
pub fn sample_coupled(beta: f64, s: &[u32], rng: &mut Rng) -> Result<CoupledSample> {
    check_set(s)?;
    let r = s.len();
    let mut reach = vec![0u32; r];
    let mut covered = vec![false; r];
    for k in 2..=r + 1 {
        let (bl, br) = blocks(s, k);
        let (nl, _) = neighbourhoods(s, k - 1);
        let (_, nr) = neighbourhoods(s, k - 1);
        let mut hits: Vec<i64> = Vec::new();
        let (b1, b2) = bl.continuous();
        let (n1, n2) = nl.continuous();
        for p in sample_rect_points(beta, b1, b2, n1, n2, rng)? {
            hits.push(p.edge().1);
        }
        let mut hits_r: Vec<i64> = Vec::new();
        let (b1, b2) = br.continuous();
        let (n1, n2) = nr.continuous();
        for p in sample_rect_points(beta, n1, n2, b1, b2, rng)? {
            hits_r.push(p.edge().0);
        }
        let mut first = None;
        for t in 1..k {
            let (l, rr) = neighbourhoods(s, t);
            if hits.iter().any(|&v| l.contains(v)) || hits_r.iter().any(|&v| rr.contains(v)) {
                first.get_or_insert(t);
                covered[t - 1] = true;
            }
        }
        reach[k - 2] = first.map_or(0, |t| (k - t) as u32);
    }
    let (layers, m_r) = spread(&reach);
    Ok(CoupledSample { state: SpreadState { r, s: s.to_vec(), reach, layers, m_r }, covered })
}
