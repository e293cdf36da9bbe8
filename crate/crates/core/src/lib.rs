//! Ergodic Kullback-Leibler control problems on finite state spaces,
//! solved three ways: exact Perron eigenpair solvers, stochastic
//! approximation learners (KL-learning, projected KL-learning,
//! Z-learning), and a mean-field ODE layer that validates the learners'
//! dynamics, the stability of their equilibrium, and the open question
//! about diagonal stability of the linearization.
//!
//! The short version: a controlled Markov chain pays `c(j|i)` per jump
//! plus a KL penalty for deviating from uncontrolled dynamics `q`. The
//! optimal policy, value function and average cost all come from the
//! Perron pair `H z* = λ* z*` of `h_ij = exp(-β c_ij) q_ij`. The
//! learners estimate that pair from a single sampled trajectory with
//! O(1) work per transition.

pub mod benchmark;
pub mod error;
pub mod gridworld;
pub mod klproblem;
pub mod learners;
pub mod linalg;
pub mod markov;
pub mod ode;
pub mod schedule;
pub mod solvers;
pub mod stability;

pub use error::{Error, Result};
pub use klproblem::{
    average_cost, build_h, controlled_stationary, normalize_costs, optimal_policy,
    rank_one_solution, renormalize, value_function, CostShape, Eigenpair, EigenpairFile, HMatrix,
    KlProblem, Normalization, ProblemFile,
};
pub use learners::{
    learner_by_name, learner_names, run_learner, Learner, LearnerContext, LearnerState,
    RunConfig, StepSchedule, Trajectory,
};
pub use markov::{
    check_detailed_balance, empirical_pair_distribution, ergodicity_check,
    exact_pair_distribution, sample_next, stationary_distribution, stationary_pair_distribution,
    tv_distance, PairDistribution, ProbVector, StochasticMatrix,
};
pub use ode::{
    compare_paths, integrate_euler, integrate_kl_ode, interpolate_trajectory, mean_field_eval,
    mean_field_eval_with, ode_tracking_study, rhs_kl, rhs_reduced, rhs_zlearning, OdePath,
    TrackingConfig, WindowStat,
};
pub use solvers::{solve_power, solve_relaxed, solver_by_name, EigenSolver, PowerSolver, RelaxedSolver};
pub use stability::{
    conjecture_fuzz, linearization, spectral_abscissa, stability_report, stability_report_for,
    DMode, FuzzConfig, FuzzSummary, StabilityReport, SufficientCondition,
};
