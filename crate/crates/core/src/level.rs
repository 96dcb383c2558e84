//! Level curves `{(x, y) : P(X > x, Y > y) = p}` shared by both estimation routes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub x: f64,
    /// `None` when the level is not attainable at this `x`.
    pub y: Option<f64>,
    /// Set when a monotonicity cleanup moved this point.
    #[serde(default)]
    pub adjusted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LevelPoint {
    pub fn solved(x: f64, y: f64) -> Self {
        Self {
            x,
            y: Some(y),
            adjusted: false,
            note: None,
        }
    }

    pub fn missing(x: f64, note: impl Into<String>) -> Self {
        Self {
            x,
            y: None,
            adjusted: false,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelCurve {
    pub p: f64,
    pub points: Vec<LevelPoint>,
}

/// Where `target` sits relative to a non-increasing `g` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Root {
    Found(f64),
    /// `g(lo) < target`: the root would lie below `lo`.
    BelowRange,
    /// `g(hi) > target`: the root would lie above `hi`.
    AboveRange,
}

/// Bisection for `g(y) = target` with `g` non-increasing.
pub fn bisect_decreasing<G: Fn(f64) -> f64>(g: G, target: f64, lo: f64, hi: f64) -> Root {
    if g(lo) < target {
        return Root::BelowRange;
    }
    if g(hi) > target {
        return Root::AboveRange;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
        if g(mid) > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Root::Found(0.5 * (a + b))
}
