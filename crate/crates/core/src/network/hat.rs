use super::{condense, effective_resistance, CondensedNetwork, ResistanceResult, Terminals};
use crate::error::{invalid, Result};
use crate::model::{LrpWindow, Span};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HatSide {
    /// Flow from `[-N, 0]` forced through `(0, N]`.
    Left,
    /// Flow from `[0, N]` forced through `[-N, 0)`.
    Right,
}

/// The resistances measured on a window. `size` is `N` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    /// `R(0, [-N, N]^c)`.
    Point { size: i64 },
    /// `R([-N, N], [-2N, 2N]^c)`.
    Box { size: i64 },
    /// `R̂((-∞, 0], (N, ∞))`: flows must pass through `(0, N]`.
    HatN { size: i64 },
    /// `R̂(I₁, I₂)`: unit flows from `source` to `sink` confined to the hull
    /// of both and passing through the gap between them.
    Hat { source: Span, sink: Span },
    /// `R̃_n`: from `[-N, 0]` to `(-∞, -N)` through `(0, N]`, with the edges
    /// between `(0, N]` and `(N, ∞)` removed.
    Tilde { size: i64 },
    /// `R̂([-N,0], [-N,N]^c)` or its mirror image.
    HatSplit { size: i64, side: HatSide },
}

impl Statistic {
    pub fn terminals(&self) -> Result<Terminals> {
        let outside = |n: i64| vec![Span::up_to(-n - 1), Span::from(n + 1)];
        let pos = |n: i64| -> Result<i64> {
            if n >= 1 {
                Ok(n)
            } else {
                Err(invalid(format!("N must be at least 1, got {n}")))
            }
        };
        Ok(match *self {
            Statistic::Point { size } => {
                if size < 0 {
                    return Err(invalid(format!("N must be nonnegative, got {size}")));
                }
                let n = size;
                Terminals {
                    source: vec![Span::point(0)],
                    sink: outside(n),
                    interior: Span::new(-n, n),
                    forbid_direct: false,
                    forbidden: vec![],
                }
            }
            Statistic::Box { size } => {
                let n = pos(size)?;
                Terminals {
                    source: vec![Span::new(-n, n)],
                    sink: outside(2 * n),
                    interior: Span::new(-2 * n, 2 * n),
                    forbid_direct: false,
                    forbidden: vec![],
                }
            }
            Statistic::HatN { size } => {
                let n = pos(size)?;
                Terminals {
                    source: vec![Span::up_to(0)],
                    sink: vec![Span::from(n + 1)],
                    interior: Span::new(1, n),
                    forbid_direct: true,
                    forbidden: vec![],
                }
            }
            Statistic::Hat { source, sink } => {
                if source.is_empty() || sink.is_empty() {
                    return Err(invalid("terminal intervals must be nonempty"));
                }
                let gap = match (source.hi, sink.lo, sink.hi, source.lo) {
                    (Some(a), Some(b), _, _) if a < b => Span::new(a + 1, b - 1),
                    (_, _, Some(a), Some(b)) if a < b => Span::new(a + 1, b - 1),
                    _ => return Err(invalid(format!("intervals {source} and {sink} overlap"))),
                };
                Terminals {
                    source: vec![source],
                    sink: vec![sink],
                    interior: gap,
                    forbid_direct: true,
                    forbidden: vec![],
                }
            }
            Statistic::Tilde { size } => {
                let n = pos(size)?;
                Terminals {
                    source: vec![Span::new(-n, 0)],
                    sink: vec![Span::up_to(-n - 1)],
                    interior: Span::new(1, n),
                    forbid_direct: true,
                    forbidden: vec![],
                }
            }
            Statistic::HatSplit { size, side } => {
                let n = pos(size)?;
                let (source, interior) = match side {
                    HatSide::Left => (Span::new(-n, 0), Span::new(1, n)),
                    HatSide::Right => (Span::new(0, n), Span::new(-n, -1)),
                };
                Terminals { source: vec![source], sink: outside(n), interior, forbid_direct: true, forbidden: vec![] }
            }
        })
    }
}

pub fn statistic_network(window: &LrpWindow, stat: &Statistic) -> Result<CondensedNetwork> {
    condense(window, &stat.terminals()?)
}

/// Condenses the window for `stat` and solves it.
pub fn hat_resistance(window: &LrpWindow, stat: &Statistic) -> Result<ResistanceResult> {
    effective_resistance(&statistic_network(window, stat)?)
}
