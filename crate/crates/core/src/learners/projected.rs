//! Projected KL-learning: identical to KL-learning except the increment
//! is floored at (λ_min - λ)/γ so λ can never drop below
//! λ_min = min exp(-β c)/2, and the initial point sits on the invariant
//! set (λ₀ = 2λ_min, ||z₀||₁ = λ₀).

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Learner, LearnerContext, LearnerState, StepOutcome};

#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectedKlLearning;

impl Learner for ProjectedKlLearning {
    fn name(&self) -> &'static str {
        "kl-projected"
    }

    fn init(&self, ctx: &LearnerContext, rng: &mut ChaCha8Rng) -> LearnerState {
        let n = ctx.n();
        let lambda0 = 2.0 * ctx.lambda_min;
        LearnerState {
            z: Array1::from_elem(n, lambda0 / n as f64),
            lambda: lambda0,
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
        let raw = ctx.cost_factor(x, y) * state.z[y] / state.lambda - state.z[x];
        let floor = (ctx.lambda_min - state.lambda) / gamma;
        let (delta, projected) = if raw < floor { (floor, true) } else { (raw, false) };
        state.z[x] += gamma * delta;
        state.lambda += gamma * delta;
        state.x = y;
        state.k += 1;
        StepOutcome {
            delta,
            updated: x,
            projected,
        }
    }

    fn tracks_invariant_box(&self) -> bool {
        true
    }
}
