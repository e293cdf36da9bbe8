//! Step-size (gain) schedules for iterative and stochastic solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A deterministic gain sequence γ_k, k >= 1.
///
/// `RobbinsMonro { a, b, p }` gives γ_k = a / (b + k)^p; the constructor
/// enforces p in (0.5, 1] so that Σγ_k = ∞ and Σγ_k² < ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant { gamma: f64 },
    RobbinsMonro { a: f64, b: f64, p: f64 },
}

impl StepSchedule {
    pub fn constant(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "constant gain must lie in (0, 1], got {gamma}"
            )));
        }
        Ok(Self::Constant { gamma })
    }

    pub fn robbins_monro(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidSchedule(format!("a must be positive, got {a}")));
        }
        if !(b >= 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "b must be nonnegative, got {b}"
            )));
        }
        if !(p > 0.5 && p <= 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "p must lie in (0.5, 1], got {p}"
            )));
        }
        Ok(Self::RobbinsMonro { a, b, p })
    }

    /// Gain at step k (k >= 1).
    pub fn gamma(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        match *self {
            Self::Constant { gamma } => gamma,
            Self::RobbinsMonro { a, b, p } => {
                let base = b + k as f64;
                if p == 1.0 {
                    a / base
                } else {
                    a / base.powf(p)
                }
            }
        }
    }
}

impl std::fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Constant { gamma } => write!(f, "constant({gamma})"),
            Self::RobbinsMonro { a, b, p } => write!(f, "robbins_monro({a},{b},{p})"),
        }
    }
}
