//! Stochastic approximation learners for the Perron eigenpair, behind a
//! common strategy trait: KL-learning, its projected variant, and
//! Z-learning. Each registered by name and selectable at runtime.
//!
//! Every step draws the next chain state from the uncontrolled dynamics,
//! observes the transition cost, and updates a single component of z —
//! O(1) work per step.

mod kl;
mod projected;
mod sg;
mod z;

pub use kl::KlLearning;
pub use projected::ProjectedKlLearning;
pub use sg::{check_r_posdef, run_sg, sg_step, RPosdefReport};
pub use z::ZLearning;

pub use crate::schedule::StepSchedule;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::klproblem::{Eigenpair, KlProblem};

/// λ is re-synced to ||z||₁ every this many steps to stop floating-point
/// drift from detaching the coupled update over long runs.
pub const LAMBDA_RESYNC_STRIDE: u64 = 10_000;

/// Relative rounding slack granted on the invariant-box checks; matches
/// the 1e-9 bookkeeping drift tolerance.
const BOX_SLACK: f64 = 1e-9;

/// Mutable state of a stochastic learner.
#[derive(Debug, Clone)]
pub struct LearnerState {
    pub z: Array1<f64>,
    pub lambda: f64,
    pub x: usize,
    pub k: u64,
}

impl LearnerState {
    /// Rejects states whose bookkeeping λ does not match ||z||₁.
    pub fn validated(z: Array1<f64>, lambda: f64, x: usize, k: u64) -> Result<Self> {
        let mass = z.sum();
        if (mass - lambda).abs() > 1e-9 * lambda.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "initial state has ||z||1 = {mass} but lambda = {lambda}"
            )));
        }
        Ok(Self { z, lambda, x, k })
    }
}

/// Problem tables shared by all learner steps: cost factors, sampling
/// CDFs and the invariant-box edges.
#[derive(Debug, Clone)]
pub struct LearnerContext {
    n: usize,
    /// exp(-β c(j|i))
    w: Array2<f64>,
    /// row-wise cumulative sums of q for inverse-CDF sampling
    cdf: Array2<f64>,
    /// support mask of q
    support: Array2<bool>,
    pub lambda_min: f64,
    pub m_bound: f64,
}

impl LearnerContext {
    pub fn new(problem: &KlProblem) -> Self {
        let n = problem.n();
        let w = problem.cost_factors();
        let mut cdf = Array2::zeros((n, n));
        let mut support = Array2::from_elem((n, n), false);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                let q = problem.chain().get(i, j);
                acc += q;
                cdf[[i, j]] = acc;
                support[[i, j]] = q > 0.0;
            }
        }
        Self {
            n,
            w,
            cdf,
            support,
            lambda_min: problem.lambda_min(),
            m_bound: problem.m_bound(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cost_factor(&self, i: usize, j: usize) -> f64 {
        self.w[[i, j]]
    }

    /// Draws the next state from q(.|x) by binary search on the row CDF.
    #[inline]
    pub fn sample_next<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let row = self.cdf.row(x);
        let slice = row.as_slice().expect("cdf rows are contiguous");
        let mut j = slice.partition_point(|&c| c <= u);
        if j >= self.n {
            j = self.n - 1;
        }
        while j > 0 && !self.support[[x, j]] {
            j -= 1;
        }
        j
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    /// The increment Δ applied to z(x_{k-1}) and λ.
    pub delta: f64,
    /// Index of the component that was updated (the departure state).
    pub updated: usize,
    /// Whether the λ-floor projection clipped the raw increment.
    pub projected: bool,
}

/// A stochastic eigenpair learner: one registered strategy.
pub trait Learner: Sync {
    /// Registry key, e.g. "kl".
    fn name(&self) -> &'static str;

    /// Initial state per the algorithm's definition; the start state is
    /// drawn uniformly.
    fn init(&self, ctx: &LearnerContext, rng: &mut ChaCha8Rng) -> LearnerState;

    /// One transition + one O(1) update.
    fn step(
        &self,
        state: &mut LearnerState,
        ctx: &LearnerContext,
        gamma: f64,
        rng: &mut ChaCha8Rng,
    ) -> StepOutcome;

    /// Whether the invariant box of the projected analysis
    /// (z in (0, M]^n, λ in [λ_min, nM]) is expected to contain iterates.
    fn tracks_invariant_box(&self) -> bool;
}

static REGISTRY: [&'static dyn Learner; 3] = [&KlLearning, &ProjectedKlLearning, &ZLearning];

/// Resolves a learner strategy by its registry name.
pub fn learner_by_name(name: &str) -> Option<&'static dyn Learner> {
    REGISTRY.iter().find(|l| l.name() == name).copied()
}

/// Names of all registered learners.
pub fn learner_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|l| l.name()).collect()
}

/// One recorded snapshot along a run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub k: u64,
    /// Gain used at step k (0 for the initial snapshot).
    pub gamma: f64,
    /// Algorithmic time t_k = Σ_{i<=k} γ_i.
    pub t: f64,
    pub lambda: f64,
    pub x: usize,
    /// ||z/||z||₁ - z*/||z*||₁||₁ against the reference, when provided.
    pub err_l1: Option<f64>,
    /// Cumulative projection count up to step k.
    pub projections: u64,
    pub z: Array1<f64>,
}

/// Recorded run of a learner: snapshots every `stride` steps plus the
/// final step, with the seed and invariant bookkeeping.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub algo: String,
    pub seed: u64,
    pub stride: u64,
    pub schedule: StepSchedule,
    pub lambda_min: f64,
    pub m_bound: f64,
    pub records: Vec<TrajectoryRecord>,
    pub projection_count: u64,
    /// Largest |λ - ||z||₁| observed at re-sync points.
    pub max_lambda_drift: f64,
    /// Steps at which the iterate left the invariant box (tracked
    /// learners only; zero is the expected value).
    pub containment_violations: u64,
    pub final_state: LearnerState,
    pub divergence_warning: Option<String>,
}

impl Trajectory {
    pub fn final_err(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.err_l1)
    }

    /// CSV export: `k,t,gamma,lambda,err_l1,x,projection_count` plus one
    /// column per state. Deterministic row order and formatting.
    pub fn to_csv(&self) -> String {
        let n = self.final_state.z.len();
        let mut out = String::new();
        out.push_str("k,t,gamma,lambda,err_l1,x,projection_count");
        for i in 0..n {
            out.push_str(&format!(",z{i}"));
        }
        out.push('\n');
        for r in &self.records {
            let err = r.err_l1.map(|e| format!("{e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}",
                r.k, r.t, r.gamma, r.lambda, err, r.x, r.projections
            ));
            for v in r.z.iter() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Run parameters; the seed is stored in the output so any run can be
/// reproduced bit for bit.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub schedule: StepSchedule,
    pub steps: u64,
    pub stride: u64,
    pub seed: u64,
}

/// Drives a learner for `steps` transitions, recording snapshots and
/// checking state sanity along the way.
pub fn run_learner(
    algo: &dyn Learner,
    problem: &KlProblem,
    cfg: &RunConfig,
    reference: Option<&Eigenpair>,
) -> Result<Trajectory> {
    if cfg.stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    let ctx = LearnerContext::new(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = algo.init(&ctx, &mut rng);
    let ref_unit: Option<Array1<f64>> = reference.map(|e| {
        let s = e.z().sum();
        e.z().mapv(|v| v / s)
    });
    let n = ctx.n();
    let track_box = algo.tracks_invariant_box();
    let box_hi = ctx.m_bound * (1.0 + BOX_SLACK);
    let lam_lo = ctx.lambda_min * (1.0 - BOX_SLACK);
    let lam_hi = n as f64 * ctx.m_bound * (1.0 + BOX_SLACK);

    let err_of = |z: &Array1<f64>| -> Option<f64> {
        ref_unit.as_ref().map(|r| {
            let mass = z.sum();
            if mass > 0.0 {
                z.iter()
                    .zip(r.iter())
                    .map(|(a, b)| (a / mass - b).abs())
                    .sum()
            } else {
                f64::NAN
            }
        })
    };

    let mut records = Vec::new();
    let mut projections = 0u64;
    let mut violations = 0u64;
    let mut max_drift = 0.0f64;
    let mut t = 0.0f64;
    records.push(TrajectoryRecord {
        k: 0,
        gamma: 0.0,
        t,
        lambda: state.lambda,
        x: state.x,
        err_l1: err_of(&state.z),
        projections: 0,
        z: state.z.clone(),
    });
    let initial_mass = state.z.sum();

    for k in 1..=cfg.steps {
        let gamma = cfg.schedule.gamma(k);
        let out = algo.step(&mut state, &ctx, gamma, &mut rng);
        t += gamma;
        if out.projected {
            projections += 1;
        }
        let zx = state.z[out.updated];
        if !zx.is_finite() || !state.lambda.is_finite() {
            return Err(Error::StateCorrupt {
                step: k,
                reason: format!(
                    "non-finite value after update (z = {zx}, lambda = {})",
                    state.lambda
                ),
            });
        }
        if track_box {
            if zx <= 0.0 {
                return Err(Error::StateCorrupt {
                    step: k,
                    reason: format!("positivity breach: z({}) = {zx}", out.updated),
                });
            }
            if zx > box_hi || state.lambda < lam_lo || state.lambda > lam_hi {
                violations += 1;
            }
        }
        if k % LAMBDA_RESYNC_STRIDE == 0 || k == cfg.steps {
            let mass = state.z.sum();
            let drift = (state.lambda - mass).abs();
            if drift > max_drift {
                max_drift = drift;
            }
            state.lambda = mass;
        }
        if k % cfg.stride == 0 || k == cfg.steps {
            records.push(TrajectoryRecord {
                k,
                gamma,
                t,
                lambda: state.lambda,
                x: state.x,
                err_l1: err_of(&state.z),
                projections,
                z: state.z.clone(),
            });
        }
    }

    let final_mass = state.z.sum();
    let divergence_warning = if !track_box && cfg.steps > 0 {
        let ratio = final_mass / initial_mass;
        if !(0.1..=10.0).contains(&ratio) {
            Some(format!(
                "||z||1 drifted by factor {ratio:.3e} over the run; the \
                 fixed-point iteration has no equilibrium unless the spectral \
                 radius is 1"
            ))
        } else {
            None
        }
    } else {
        None
    };

    Ok(Trajectory {
        algo: algo.name().to_string(),
        seed: cfg.seed,
        stride: cfg.stride,
        schedule: cfg.schedule,
        lambda_min: ctx.lambda_min,
        m_bound: ctx.m_bound,
        records,
        projection_count: projections,
        max_lambda_drift: max_drift,
        containment_violations: violations,
        final_state: state,
        divergence_warning,
    })
}

#[cfg(test)]
mod tests;
