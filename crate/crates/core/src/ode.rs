//! Mean-field ODE layer: right-hand sides for the learners, the exact
//! pair-averaged update (the analytic oracle for every learner), Euler
//! integration, and comparison of interpolated learner paths against
//! ODE trajectories on the algorithmic timescale.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::klproblem::HMatrix;
use crate::learners::Trajectory;
use crate::markov::{stationary_distribution, ProbVector, StochasticMatrix};

/// A sampled continuous-time path: states at strictly increasing times.
#[derive(Debug, Clone)]
pub struct OdePath {
    times: Vec<f64>,
    states: Vec<Array1<f64>>,
}

impl OdePath {
    pub fn new(times: Vec<f64>, states: Vec<Array1<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::InvalidInput("path needs matching times/states".into()));
        }
        let dim = states[0].len();
        if states.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidInput("path states change dimension".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("path times must strictly increase".into()));
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Array1<f64>] {
        &self.states
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Linear interpolation, clamped at the ends.
    pub fn eval(&self, t: f64) -> Array1<f64> {
        if t <= self.t_start() {
            return self.states[0].clone();
        }
        if t >= self.t_end() {
            return self.states.last().unwrap().clone();
        }
        let idx = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (&self.states[idx - 1], &self.states[idx]);
        a * (1.0 - w) + b * w
    }
}

/// KL-learning mean field: f(z, λ) = D(H/λ - I) z together with
/// h(z, λ) = 1ᵀ f(z, λ); the λ-derivative equals the sum of the
/// z-derivative components by construction.
pub fn rhs_kl(
    z: ArrayView1<'_, f64>,
    lambda: f64,
    d: ArrayView1<'_, f64>,
    h: &HMatrix,
) -> Result<(Array1<f64>, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::LambdaNonPositive(lambda));
    }
    let hz = h.matrix().dot(&z);
    let mut zdot = Array1::zeros(z.len());
    for i in 0..z.len() {
        zdot[i] = d[i] * (hz[i] / lambda - z[i]);
    }
    let lambdadot = zdot.sum();
    Ok((zdot, lambdadot))
}

/// The reduced n-dimensional field: rhs_kl with λ := ||z||₁.
pub fn rhs_reduced(
    z: ArrayView1<'_, f64>,
    d: ArrayView1<'_, f64>,
    h: &HMatrix,
) -> Result<Array1<f64>> {
    let mass: f64 = z.sum();
    Ok(rhs_kl(z, mass, d, h)?.0)
}

/// Z-learning mean field: -D(I - H) z (a linear field).
pub fn rhs_zlearning(
    z: ArrayView1<'_, f64>,
    d: ArrayView1<'_, f64>,
    h: &HMatrix,
) -> Array1<f64> {
    let hz = h.matrix().dot(&z);
    let mut out = Array1::zeros(z.len());
    for i in 0..z.len() {
        out[i] = d[i] * (hz[i] - z[i]);
    }
    out
}

/// Exact pair-averaged update Σ_i Σ_j q_i q_ij f(i, j) under the
/// stationary pair distribution — the analytic mean field of any
/// single-transition update rule.
pub fn mean_field_eval<F>(f: F, p: &StochasticMatrix) -> Result<Array1<f64>>
where
    F: Fn(usize, usize) -> Array1<f64>,
{
    let q = stationary_distribution(p, 1e-13)?;
    Ok(mean_field_eval_with(f, p, &q))
}

/// As [`mean_field_eval`] with the stationary distribution supplied.
pub fn mean_field_eval_with<F>(f: F, p: &StochasticMatrix, q: &ProbVector) -> Array1<f64>
where
    F: Fn(usize, usize) -> Array1<f64>,
{
    let n = p.n();
    let mut acc: Option<Array1<f64>> = None;
    for i in 0..n {
        for j in 0..n {
            let w = q.get(i) * p.get(i, j);
            if w == 0.0 {
                continue;
            }
            let v = f(i, j);
            match acc.as_mut() {
                Some(a) => *a += &(v * w),
                None => acc = Some(v * w),
            }
        }
    }
    acc.expect("ergodic chain has at least one transition")
}

/// Explicit Euler path for a generic autonomous field, with blow-up
/// detection. Nodes at 0, dt, 2dt, ..., including the endpoint.
pub fn integrate_euler<F>(rhs: F, x0: ArrayView1<'_, f64>, dt: f64, t_end: f64) -> Result<OdePath>
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    if !(dt > 0.0) || t_end < dt {
        return Err(Error::InvalidInput(format!(
            "need dt > 0 and t_end >= dt, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let mut x = x0.to_owned();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x.clone());
    for s in 1..=steps {
        let f = rhs(&x);
        for i in 0..x.len() {
            x[i] += dt * f[i];
        }
        let t = s as f64 * dt;
        if x.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
            return Err(Error::Blowup { t });
        }
        times.push(t);
        states.push(x.clone());
    }
    OdePath::new(times, states)
}

/// Euler path of the coupled KL field on the stacked state [z..., λ],
/// asserting the flow invariant | ||z(t)||₁ - λ(t) | = O(dt) at every node.
pub fn integrate_kl_ode(
    h: &HMatrix,
    d: ArrayView1<'_, f64>,
    z0: ArrayView1<'_, f64>,
    lambda0: f64,
    dt: f64,
    t_end: f64,
) -> Result<OdePath> {
    let n = z0.len();
    let mut x0 = Array1::zeros(n + 1);
    x0.slice_mut(ndarray::s![..n]).assign(&z0);
    x0[n] = lambda0;
    integrate_euler(
        |x| {
            let z = x.slice(ndarray::s![..n]);
            let lambda = x[n];
            let (zdot, ldot) = rhs_kl(z, lambda, d, h).expect("lambda stays positive on the flow");
            let mut out = Array1::zeros(n + 1);
            out.slice_mut(ndarray::s![..n]).assign(&zdot);
            out[n] = ldot;
            out
        },
        x0.view(),
        dt,
        t_end,
    )
}

/// Piecewise-constant interpolation of a recorded trajectory on the
/// algorithmic timescale t_k = Σ γ_i, shifted to start at snapshot
/// step `shift` and evaluated on a uniform grid of spacing `grid_dt`.
pub fn interpolate_trajectory(traj: &Trajectory, shift: u64, grid_dt: f64) -> Result<OdePath> {
    if traj.records.is_empty() {
        return Err(Error::InvalidInput("trajectory has no snapshots".into()));
    }
    if !(grid_dt > 0.0) {
        return Err(Error::InvalidInput("grid_dt must be positive".into()));
    }
    let start_idx = traj
        .records
        .iter()
        .position(|r| r.k >= shift)
        .ok_or_else(|| Error::InvalidInput(format!("no snapshot at or after step {shift}")))?;
    let t0 = traj.records[start_idx].t;
    let t_last = traj.records.last().unwrap().t;
    let horizon = t_last - t0;
    let steps = (horizon / grid_dt).floor() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let rec_times: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
    for s in 0..=steps {
        let t = s as f64 * grid_dt;
        let abs_t = t0 + t;
        // θ(t) = θ_p for the unique p with t_p <= t + t0 < t_{p+1}
        let p = rec_times.partition_point(|&x| x <= abs_t).max(1) - 1;
        times.push(t);
        states.push(traj.records[p].z.clone());
    }
    if times.len() == 1 {
        // degenerate single-snapshot path: keep one node, constant value
        times.push(grid_dt);
        states.push(states[0].clone());
    }
    OdePath::new(times, states)
}

/// Number of resample points used by [`compare_paths`].
const RESAMPLE_POINTS: usize = 1024;

/// Sup over the window of the l1 distance between linearly resampled
/// states of two paths.
pub fn compare_paths(a: &OdePath, b: &OdePath, window: (f64, f64)) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::LengthMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let lo = window.0.max(a.t_start()).max(b.t_start());
    let hi = window.1.min(a.t_end()).min(b.t_end());
    if !(hi > lo) {
        return Err(Error::EmptyOverlap {
            lo: window.0,
            hi: window.1,
        });
    }
    let mut sup = 0.0f64;
    for s in 0..=RESAMPLE_POINTS {
        let t = lo + (hi - lo) * s as f64 / RESAMPLE_POINTS as f64;
        let xa = a.eval(t);
        let xb = b.eval(t);
        let dist: f64 = xa.iter().zip(xb.iter()).map(|(u, v)| (u - v).abs()).sum();
        if dist > sup {
            sup = dist;
        }
    }
    Ok(sup)
}

/// Parameters of the learner-vs-ODE tracking study.
#[derive(Debug, Clone)]
pub struct TrackingConfig {
    pub schedule: crate::learners::StepSchedule,
    pub steps: u64,
    pub seeds: Vec<u64>,
    /// Window start times on the algorithmic timescale.
    pub window_starts: Vec<f64>,
    pub window_width: f64,
    /// Resolution of the interpolated learner path.
    pub grid_dt: f64,
    /// Euler step of the reference ODE integration.
    pub euler_dt: f64,
}

/// Sup-distance statistics for one window across seeds.
#[derive(Debug, Clone)]
pub struct WindowStat {
    pub t_start: f64,
    pub per_seed: Vec<f64>,
    pub median: f64,
}

fn median_of(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Runs a learner across seeds and measures, per window, the sup
/// l1-distance between the shifted interpolated iterate path and the
/// mean-field ODE started from the iterate at the window start. Later
/// windows see smaller gains, so the distance should shrink.
pub fn ode_tracking_study(
    problem: &crate::klproblem::KlProblem,
    algo: &dyn crate::learners::Learner,
    cfg: &TrackingConfig,
) -> Result<Vec<WindowStat>> {
    let h = crate::klproblem::build_h(problem);
    let q = stationary_distribution(problem.chain(), 1e-13)?;
    let d = q.vector().to_owned();
    let is_z = algo.name() == "z";
    let mut per_window: Vec<Vec<f64>> = vec![Vec::new(); cfg.window_starts.len()];
    for &seed in &cfg.seeds {
        let run_cfg = crate::learners::RunConfig {
            schedule: cfg.schedule,
            steps: cfg.steps,
            stride: 1,
            seed,
        };
        let traj = crate::learners::run_learner(algo, problem, &run_cfg, None)?;
        for (w, &t_start) in cfg.window_starts.iter().enumerate() {
            let start_rec = traj
                .records
                .iter()
                .find(|r| r.t >= t_start)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "trajectory ends at t = {:.3} before window start {t_start}",
                        traj.records.last().unwrap().t
                    ))
                })?;
            let shift = start_rec.k;
            let z0 = start_rec.z.clone();
            let learner_path = interpolate_trajectory(&traj, shift, cfg.grid_dt)?;
            let ode_path = if is_z {
                integrate_euler(
                    |z| rhs_zlearning(z.view(), d.view(), &h),
                    z0.view(),
                    cfg.euler_dt,
                    cfg.window_width,
                )?
            } else {
                integrate_euler(
                    |z| rhs_reduced(z.view(), d.view(), &h).expect("mass stays positive"),
                    z0.view(),
                    cfg.euler_dt,
                    cfg.window_width,
                )?
            };
            let dist = compare_paths(&learner_path, &ode_path, (0.0, cfg.window_width))?;
            per_window[w].push(dist);
        }
    }
    Ok(cfg
        .window_starts
        .iter()
        .zip(per_window)
        .map(|(&t_start, per_seed)| WindowStat {
            t_start,
            median: median_of(per_seed.clone()),
            per_seed,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klproblem::{build_h, renormalize, KlProblem, Normalization};
    use crate::markov::StochasticMatrix;
    use crate::solvers::solve_power;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn two_state() -> (KlProblem, HMatrix) {
        let q = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let p = KlProblem::with_state_costs(q, array![0.0, 2.0f64.ln()].view(), 1.0).unwrap();
        let h = build_h(&p);
        (p, h)
    }

    #[test]
    fn rhs_kl_vanishes_at_equilibrium() {
        let (_, h) = two_state();
        let e = solve_power(&h, 1e-13, 1_000_000).unwrap();
        let e = renormalize(&e, Normalization::LambdaSum);
        let d = array![0.5, 0.5];
        let (zdot, ldot) = rhs_kl(e.z(), e.lambda(), d.view(), &h).unwrap();
        for v in zdot.iter() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(ldot, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rhs_kl_hand_values() {
        let (_, h) = two_state();
        let d = array![0.5, 0.5];
        let z = array![0.6, 0.15];
        let (zdot, ldot) = rhs_kl(z.view(), 0.75, d.view(), &h).unwrap();
        // Hz = (0.375, 0.1875); /λ = (0.5, 0.25); -z = (-0.1, 0.1); *D
        assert_abs_diff_eq!(zdot[0], -0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(zdot[1], 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(ldot, 0.0, epsilon = 1e-15);
        assert!(rhs_kl(z.view(), 0.0, d.view(), &h).is_err());
    }

    #[test]
    fn reduced_field_sums_to_lambda_dot() {
        let (_, h) = two_state();
        let d = array![0.5, 0.5];
        let z = array![0.3, 0.6];
        let zdot = rhs_reduced(z.view(), d.view(), &h).unwrap();
        let (zdot2, ldot) = rhs_kl(z.view(), 0.9, d.view(), &h).unwrap();
        assert_abs_diff_eq!(zdot.sum(), ldot, epsilon = 1e-15);
        for (a, b) in zdot.iter().zip(zdot2.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn z_field_vanishes_on_stochastic_h_constant_vector() {
        let q = StochasticMatrix::new(array![[0.3, 0.7], [0.6, 0.4]]).unwrap();
        let p = KlProblem::new(q, ndarray::Array2::zeros((2, 2)), 1.0).unwrap();
        let h = build_h(&p);
        let d = array![6.0 / 13.0, 7.0 / 13.0];
        let out = rhs_zlearning(array![1.0, 1.0].view(), d.view(), &h);
        for v in out.iter() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mean_field_of_unit_vectors_is_stationary() {
        let q = StochasticMatrix::new(array![[0.9, 0.1], [0.5, 0.5]]).unwrap();
        let g = mean_field_eval(
            |i, _| {
                let mut e = Array1::zeros(2);
                e[i] = 1.0;
                e
            },
            &q,
        )
        .unwrap();
        assert_abs_diff_eq!(g[0], 5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn mean_field_matches_rhs_kl_exactly() {
        // the per-pair KL update averaged under the stationary pair law
        // is exactly D(H/λ - I)z stacked with its component sum
        let (p, h) = two_state();
        let q = crate::markov::stationary_distribution(p.chain(), 1e-13).unwrap();
        let z = array![0.42, 0.17];
        let lambda = 0.6;
        let n = 2;
        let g = mean_field_eval_with(
            |i, j| {
                let delta = p.cost_factor(i, j) * z[j] / lambda - z[i];
                let mut v = Array1::zeros(n + 1);
                v[i] = delta;
                v[n] = delta;
                v
            },
            p.chain(),
            &q,
        );
        let (zdot, ldot) = rhs_kl(z.view(), lambda, q.vector(), &h).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(g[i], zdot[i], epsilon = 1e-14);
        }
        assert_abs_diff_eq!(g[n], ldot, epsilon = 1e-14);
    }

    #[test]
    fn euler_scalar_exponential() {
        let path = integrate_euler(|x| -x.clone(), array![1.0].view(), 1e-4, 1.0).unwrap();
        let end = path.states().last().unwrap()[0];
        assert!((end - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn euler_zero_field_is_constant() {
        let path = integrate_euler(
            |x| Array1::zeros(x.len()),
            array![0.3, 0.7].view(),
            0.1,
            2.0,
        )
        .unwrap();
        for s in path.states() {
            assert_eq!(s, &array![0.3, 0.7]);
        }
    }

    #[test]
    fn euler_detects_blowup() {
        let err = integrate_euler(|x| x * 1e6, array![1.0].view(), 1.0, 50.0).unwrap_err();
        assert!(matches!(err, Error::Blowup { .. }));
    }

    #[test]
    fn kl_ode_converges_to_lambda_sum_equilibrium() {
        let (p, h) = two_state();
        let d = crate::markov::stationary_distribution(p.chain(), 1e-13).unwrap();
        let e = solve_power(&h, 1e-13, 1_000_000).unwrap();
        let e = renormalize(&e, Normalization::LambdaSum);
        let lambda0 = 2.0 * p.lambda_min();
        let z0 = Array1::from_elem(2, lambda0 / 2.0);
        let path =
            integrate_kl_ode(&h, d.vector(), z0.view(), lambda0, 1e-4, 200.0).unwrap();
        let last = path.states().last().unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(last[i], e.z()[i], epsilon = 1e-6);
        }
        assert_abs_diff_eq!(last[2], e.lambda(), epsilon = 1e-6);
        // flow invariant ||z|| = λ up to O(dt)
        for s in path.states() {
            assert!((s[0] + s[1] - s[2]).abs() <= 1e-3);
        }
    }

    #[test]
    fn compare_identical_paths_is_zero() {
        let p = integrate_euler(|x| -x.clone(), array![1.0, 2.0].view(), 0.01, 1.0).unwrap();
        assert_abs_diff_eq!(compare_paths(&p, &p, (0.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn compare_constant_paths_gives_l1_distance() {
        let a = OdePath::new(
            vec![0.0, 1.0],
            vec![array![1.0, 0.0], array![1.0, 0.0]],
        )
        .unwrap();
        let b = OdePath::new(
            vec![0.0, 1.0],
            vec![array![0.0, 0.5], array![0.0, 0.5]],
        )
        .unwrap();
        assert_abs_diff_eq!(compare_paths(&a, &b, (0.0, 1.0)).unwrap(), 1.5);
        assert!(matches!(
            compare_paths(&a, &b, (5.0, 6.0)),
            Err(Error::EmptyOverlap { .. })
        ));
    }

    #[test]
    fn interpolation_is_piecewise_constant_on_gain_timescale() {
        use crate::learners::{run_learner, KlLearning, RunConfig, StepSchedule};
        let (p, _) = two_state();
        let cfg = RunConfig {
            schedule: StepSchedule::constant(0.5).unwrap(),
            steps: 4,
            stride: 1,
            seed: 2,
        };
        let traj = run_learner(&KlLearning, &p, &cfg, None).unwrap();
        // t_k = 0.5 k; grid at 0.25 steps alternates between snapshots
        let path = interpolate_trajectory(&traj, 0, 0.25).unwrap();
        assert_eq!(path.times().len(), 9);
        assert_eq!(path.states()[0], traj.records[0].z);
        assert_eq!(path.states()[1], traj.records[0].z);
        assert_eq!(path.states()[2], traj.records[1].z);
        // single snapshot -> constant path
        let cfg0 = RunConfig { steps: 0, ..cfg };
        let traj0 = run_learner(&KlLearning, &p, &cfg0, None).unwrap();
        let path0 = interpolate_trajectory(&traj0, 0, 0.5).unwrap();
        assert_eq!(path0.states()[0], path0.states()[path0.states().len() - 1]);
    }
}
