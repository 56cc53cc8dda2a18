use std::fmt;

use serde::{Deserialize, Serialize};

/// A real number or `+∞`. JSON has no infinities, so the unbounded case is a
/// separate variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    Unbounded,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Extended::Unbounded)
    }

    /// `f64` view, with `+inf` for the unbounded case.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Unbounded => write!(f, "+inf"),
        }
    }
}

/// Log-spaced grid of `n ≥ 2` points from `a` to `b` inclusive, `0 < a < b`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
