//! KL-learning: the coupled single-component update
//! Δ = exp(-β c(y|x)) z(y)/λ - z(x), applied to both z(x) and λ.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Learner, LearnerContext, LearnerState, StepOutcome};

#[derive(Debug, Clone, Copy, Default)]
pub struct KlLearning;

impl Learner for KlLearning {
    fn name(&self) -> &'static str {
        "kl"
    }

    fn init(&self, ctx: &LearnerContext, rng: &mut ChaCha8Rng) -> LearnerState {
        let n = ctx.n();
        LearnerState {
            z: Array1::from_elem(n, 1.0 / n as f64),
            lambda: 1.0,
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
        let delta = ctx.cost_factor(x, y) * state.z[y] / state.lambda - state.z[x];
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
        true
    }
}
