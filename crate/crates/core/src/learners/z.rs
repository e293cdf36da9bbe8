//! Z-learning: the fixed-point update Δ = exp(-β c(y|x)) z(y) - z(x)
//! without the λ division, meaningful when the spectral radius is 1.
//! Running it on unnormalized problems is allowed so its drift toward 0
//! or ∞ can be studied; λ is maintained as ||z||₁ for reporting only.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Learner, LearnerContext, LearnerState, StepOutcome};

#[derive(Debug, Clone, Copy, Default)]
pub struct ZLearning;

impl Learner for ZLearning {
    fn name(&self) -> &'static str {
        "z"
    }

    fn init(&self, ctx: &LearnerContext, rng: &mut ChaCha8Rng) -> LearnerState {
        let n = ctx.n();
        LearnerState {
            z: Array1::ones(n),
            lambda: n as f64,
            x: rng.random_range(0..n),
            k: 0,
        }
    }

    fn step(
        &self,
        state: &mut LearnerState,
        ctx: &LearnerContext,
        gamma: f64,
        rng: &mut ChaCha8Rng,
    ) -> StepOutcome {
        let x = state.x;
        let y = ctx.sample_next(x, rng);
        let delta = ctx.cost_factor(x, y) * state.z[y] - state.z[x];
        state.z[x] += gamma * delta;
        state.lambda += gamma * delta;
        state.x = y;
        state.k += 1;
        StepOutcome {
            delta,
            updated: x,
            projected: false,
        }
    }

    fn tracks_invariant_box(&self) -> bool {
        false
    }
}
