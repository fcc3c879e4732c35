use super::rect_integral;
use crate::error::{invalid, Result};
use crate::rng::Rng;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

/// A point of the planar Poisson process with intensity `β (y - x)^{-2}`,
/// `x < y`. The integer cell `(⌊x⌋, ⌊y⌋)` is the edge it witnesses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectPoint {
    pub x: f64,
    pub y: f64,
}

impl RectPoint {
    pub fn edge(&self) -> (i64, i64) {
        (self.x.floor() as i64, self.y.floor() as i64)
    }
}

/// Samples the Poisson points in `[a1, a2) × [b1, b2)` (left interval first).
///
/// The edge `⟨u, v⟩` is present exactly when its unit cell holds a point, so
/// this realizes the edge law on the integer pairs of the rectangle. Count is
/// `Poisson(βJ)`; `x` is drawn by inverting its marginal and `y | x` through
/// `1/(y - x)`, which is uniform.
pub fn sample_rect_points(beta: f64, a1: f64, a2: f64, b1: f64, b2: f64, rng: &mut Rng) -> Result<Vec<RectPoint>> {
    if !(a2 <= b1) {
        return Err(invalid(format!("expected [{a1},{a2}) left of [{b1},{b2})")));
    }
    let j = rect_integral(a1, a2, b1, b2)?;
    let mean = beta * j;
    if mean <= 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let g = j * rng.random::<f64>();
        let w = g.exp();
        let x = if b2 == f64::INFINITY {
            b1 - (b1 - a1) / w
        } else if a1 == f64::NEG_INFINITY {
            (b2 - w * b1) / (1.0 - w)
        } else {
            let k = (b1 - a1) / (b2 - a1);
            let r = w / k;
            (b2 - r * b1) / (1.0 - r)
        };
        let x = if x.is_finite() { x.clamp(a1, a2) } else { a1.max(a2 - 1.0) };
        let t_lo = if b2 == f64::INFINITY { 0.0 } else { 1.0 / (b2 - x) };
        let t_hi = 1.0 / (b1 - x);
        let t = t_lo + (t_hi - t_lo) * rng.random::<f64>();
        let y = (x + 1.0 / t).clamp(b1, b2);
        out.push(RectPoint { x, y });
    }
    Ok(out)
}
