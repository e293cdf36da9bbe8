use super::*;
use crate::klproblem::{build_h, renormalize, KlProblem, Normalization};
use crate::markov::StochasticMatrix;
use crate::solvers::solve_power;
use approx::assert_abs_diff_eq;
use ndarray::array;

fn two_state_problem() -> KlProblem {
    let q = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
    KlProblem::with_state_costs(q, array![0.0, 2.0f64.ln()].view(), 1.0).unwrap()
}

/// A problem whose transitions out of state 0 are deterministic, so a
/// single step is fully predictable.
fn forced_transition_problem() -> KlProblem {
    let q = StochasticMatrix::new(array![[0.0, 1.0], [0.5, 0.5]]).unwrap();
    KlProblem::new(q, ndarray::Array2::zeros((2, 2)), 1.0).unwrap()
}

#[test]
fn kl_step_hand_arithmetic() {
    let problem = forced_transition_problem();
    let ctx = LearnerContext::new(&problem);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = LearnerState {
        z: array![0.5, 0.25],
        lambda: 0.75,
        x: 0,
        k: 0,
    };
    let gamma = 0.1;
    let out = KlLearning.step(&mut state, &ctx, gamma, &mut rng);
    // y = 1 forced, c(1|0) = 0: delta = 0.25/0.75 - 0.5 = -1/6
    assert_abs_diff_eq!(out.delta, -1.0 / 6.0, epsilon = 1e-15);
    assert_eq!(out.updated, 0);
    assert_abs_diff_eq!(state.z[0], 0.5 - gamma / 6.0, epsilon = 1e-15);
    assert_abs_diff_eq!(state.lambda, 0.75 - gamma / 6.0, epsilon = 1e-15);
    assert_eq!(state.x, 1);
    assert_eq!(state.k, 1);
}

#[test]
fn kl_mean_step_matches_conditional_expectation() {
    let problem = two_state_problem();
    let ctx = LearnerContext::new(&problem);
    let h = build_h(&problem);
    let z = array![0.6, 0.15];
    let lambda = 0.75;
    let x = 0usize;
    let expect = h.matrix().dot(&z)[x] / lambda - z[x];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let trials = 100_000;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..trials {
        let mut s = LearnerState {
            z: z.clone(),
            lambda,
            x,
            k: 0,
        };
        let out = KlLearning.step(&mut s, &ctx, 0.01, &mut rng);
        sum += out.delta;
        sumsq += out.delta * out.delta;
    }
    let mean = sum / trials as f64;
    let var = (sumsq / trials as f64 - mean * mean).max(0.0);
    let sigma = (var / trials as f64).sqrt();
    assert!(
        (mean - expect).abs() <= 3.0 * sigma + 1e-12,
        "mean {mean} vs expected {expect} (3 sigma = {})",
        3.0 * sigma
    );
}

#[test]
fn kl_delta_vanishes_at_equilibrium_in_expectation() {
    let problem = two_state_problem();
    let h = build_h(&problem);
    let e = solve_power(&h, 1e-13, 1_000_000).unwrap();
    let e = renormalize(&e, Normalization::LambdaSum);
    let z = e.z().to_owned();
    for x in 0..2 {
        let expect = h.matrix().dot(&z)[x] / e.lambda() - z[x];
        assert_abs_diff_eq!(expect, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn projected_floor_binds_at_lambda_min() {
    let problem = forced_transition_problem();
    let ctx = LearnerContext::new(&problem);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    // state engineered so the raw increment is negative at λ = λ_min
    let lam = ctx.lambda_min;
    let mut state = LearnerState {
        z: array![lam * 0.9, lam * 0.1],
        lambda: lam,
        x: 0,
        k: 0,
    };
    let out = ProjectedKlLearning.step(&mut state, &ctx, 0.1, &mut rng);
    assert!(out.projected);
    assert_abs_diff_eq!(out.delta, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(state.lambda, lam, epsilon = 1e-15);
}

#[test]
fn projected_matches_plain_when_floor_inactive() {
    let problem = two_state_problem();
    let ctx = LearnerContext::new(&problem);
    let state0 = LearnerState {
        z: array![0.5, 0.25],
        lambda: 0.75,
        x: 0,
        k: 0,
    };
    let mut rng_a = ChaCha8Rng::seed_from_u64(9);
    let mut rng_b = ChaCha8Rng::seed_from_u64(9);
    let mut sa = state0.clone();
    let mut sb = state0.clone();
    let oa = KlLearning.step(&mut sa, &ctx, 0.05, &mut rng_a);
    let ob = ProjectedKlLearning.step(&mut sb, &ctx, 0.05, &mut rng_b);
    assert!(!ob.projected);
    assert_eq!(oa.delta, ob.delta);
    assert_eq!(sa.z, sb.z);
}

#[test]
fn z_step_zero_costs_moves_mass_between_components() {
    let problem = forced_transition_problem();
    let ctx = LearnerContext::new(&problem);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = LearnerState {
        z: array![0.3, 0.8],
        lambda: 1.1,
        x: 0,
        k: 0,
    };
    let out = ZLearning.step(&mut state, &ctx, 0.5, &mut rng);
    // c = 0: delta = z(y) - z(x) = 0.5
    assert_abs_diff_eq!(out.delta, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(state.z[0], 0.55, epsilon = 1e-15);
}

#[test]
fn run_zero_steps_keeps_initial_snapshot_only() {
    let problem = two_state_problem();
    let cfg = RunConfig {
        schedule: StepSchedule::constant(0.05).unwrap(),
        steps: 0,
        stride: 10,
        seed: 3,
    };
    let traj = run_learner(&KlLearning, &problem, &cfg, None).unwrap();
    assert_eq!(traj.records.len(), 1);
    assert_eq!(traj.records[0].k, 0);
    assert_abs_diff_eq!(traj.records[0].lambda, 1.0);
}

#[test]
fn runs_are_bit_reproducible() {
    let problem = two_state_problem();
    let cfg = RunConfig {
        schedule: StepSchedule::robbins_monro(1.0, 10.0, 1.0).unwrap(),
        steps: 5_000,
        stride: 100,
        seed: 77,
    };
    let a = run_learner(&KlLearning, &problem, &cfg, None).unwrap();
    let b = run_learner(&KlLearning, &problem, &cfg, None).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn lambda_bookkeeping_stays_synced() {
    let problem = two_state_problem();
    let cfg = RunConfig {
        schedule: StepSchedule::constant(0.05).unwrap(),
        steps: 200_000,
        stride: 200_000,
        seed: 5,
    };
    let traj = run_learner(&KlLearning, &problem, &cfg, None).unwrap();
    assert!(
        traj.max_lambda_drift <= 1e-9,
        "drift {}",
        traj.max_lambda_drift
    );
    let mass = traj.final_state.z.sum();
    assert_abs_diff_eq!(traj.final_state.lambda, mass, epsilon = 1e-12);
}

#[test]
fn kl_converges_on_two_state_problem() {
    let problem = two_state_problem();
    let h = build_h(&problem);
    let reference = solve_power(&h, 1e-12, 1_000_000).unwrap();
    let cfg = RunConfig {
        schedule: StepSchedule::robbins_monro(1.0, 10.0, 1.0).unwrap(),
        steps: 1_000_000,
        stride: 100_000,
        seed: 12,
    };
    let traj = run_learner(&KlLearning, &problem, &cfg, Some(&reference)).unwrap();
    let err = traj.final_err().unwrap();
    assert!(err <= 0.02, "final error {err}");
    assert_eq!(traj.containment_violations, 0);
}

#[test]
fn z_warns_about_drift_on_unnormalized_problem() {
    // λ* = 0.75 here, so Z-learning's iterate decays toward zero
    let problem = two_state_problem();
    let cfg = RunConfig {
        schedule: StepSchedule::constant(0.05).unwrap(),
        steps: 100_000,
        stride: 10_000,
        seed: 1,
    };
    let traj = run_learner(&ZLearning, &problem, &cfg, None).unwrap();
    assert!(traj.divergence_warning.is_some());
    let final_mass = traj.final_state.z.sum();
    assert!(final_mass < 0.2, "mass did not decay: {final_mass}");
}

#[test]
fn registry_knows_all_three() {
    let names = learner_names();
    assert_eq!(names, vec!["kl", "kl-projected", "z"]);
    for name in names {
        assert_eq!(learner_by_name(name).unwrap().name(), name);
    }
    assert!(learner_by_name("q-learning").is_none());
}

#[test]
fn inconsistent_initial_state_is_rejected() {
    let err = LearnerState::validated(array![0.5, 0.25], 1.0, 0, 0).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
    assert!(LearnerState::validated(array![0.5, 0.25], 0.75, 0, 0).is_ok());
}

#[test]
fn csv_has_header_and_state_columns() {
    let problem = two_state_problem();
    let cfg = RunConfig {
        schedule: StepSchedule::constant(0.05).unwrap(),
        steps: 10,
        stride: 5,
        seed: 3,
    };
    let h = build_h(&problem);
    let reference = solve_power(&h, 1e-12, 1_000_000).unwrap();
    let traj = run_learner(&KlLearning, &problem, &cfg, Some(&reference)).unwrap();
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,t,gamma,lambda,err_l1,x,projection_count,z0,z1"
    );
    // initial row + k=5 + k=10
    assert_eq!(csv.lines().count(), 4);
}
