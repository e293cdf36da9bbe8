//! Perron eigenpair solvers behind a common strategy trait, selectable
//! by name at runtime.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::klproblem::{Eigenpair, HMatrix, Normalization};
use crate::schedule::StepSchedule;

/// Default relative l1 residual at convergence.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Outcome of an eigenpair solve.
#[derive(Debug, Clone)]
pub struct EigenSolve {
    pub eigenpair: Eigenpair,
    pub residual: f64,
    pub iterations: usize,
}

/// A dominant-eigenpair iteration on an irreducible nonnegative matrix.
pub trait EigenSolver: Sync {
    fn name(&self) -> &'static str;

    /// Returns (z*, λ*) with relative l1 residual at most `tol`,
    /// unit-sum normalized.
    fn solve(&self, h: &HMatrix, tol: f64, max_iter: usize) -> Result<EigenSolve>;
}

/// z_{k+1} = H z_k / ||H z_k||₁ with λ read off as ||H z_k||₁ / ||z_k||₁.
#[derive(Debug, Clone, Copy, Default)]
pub struct PowerSolver;

impl EigenSolver for PowerSolver {
    fn name(&self) -> &'static str {
        "power"
    }

    fn solve(&self, h: &HMatrix, tol: f64, max_iter: usize) -> Result<EigenSolve> {
        if !h.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = h.n();
        let mut z = Array1::from_elem(n, 1.0 / n as f64);
        let mut lambda = 1.0;
        for it in 1..=max_iter {
            let hz = h.matrix().dot(&z);
            let mass = hz.sum();
            lambda = mass; // ||z||₁ = 1 at the top of every iteration
            let resid: f64 = hz
                .iter()
                .zip(z.iter())
                .map(|(a, b)| (a - lambda * b).abs())
                .sum();
            z = hz.mapv(|v| v / mass);
            if resid <= tol {
                let pair = Eigenpair::new(z, lambda, Normalization::UnitSum)?;
                return Ok(EigenSolve {
                    eigenpair: pair,
                    residual: resid,
                    iterations: it,
                });
            }
        }
        Err(Error::NoConvergence {
            iters: max_iter,
            residual: h.residual(z.view(), lambda),
        })
    }
}

/// Relaxed power iteration z_{k+1} = z_k + γ_k (H z_k - z_k), the update
/// the stochastic learners approximate one coordinate at a time. The
/// iterate is rescaled to unit mass at the top of each step so problems
/// with spectral radius far from 1 neither underflow nor overflow.
#[derive(Debug, Clone, Copy)]
pub struct RelaxedSolver {
    pub schedule: StepSchedule,
}

impl RelaxedSolver {
    pub fn new(schedule: StepSchedule) -> Self {
        Self { schedule }
    }
}

impl Default for RelaxedSolver {
    fn default() -> Self {
        Self::new(StepSchedule::Constant { gamma: 0.5 })
    }
}

impl EigenSolver for RelaxedSolver {
    fn name(&self) -> &'static str {
        "relaxed"
    }

    fn solve(&self, h: &HMatrix, tol: f64, max_iter: usize) -> Result<EigenSolve> {
        if !h.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = h.n();
        let mut z = Array1::from_elem(n, 1.0 / n as f64);
        let mut lambda = 1.0;
        for it in 1..=max_iter {
            let mass = z.sum();
            z.mapv_inplace(|v| v / mass);
            let gamma = self.schedule.gamma(it as u64);
            let hz = h.matrix().dot(&z);
            lambda = hz.sum(); // ||z||₁ = 1 here
            let resid: f64 = hz
                .iter()
                .zip(z.iter())
                .map(|(a, b)| (a - lambda * b).abs())
                .sum();
            if resid <= tol {
                let pair = Eigenpair::new(z, lambda, Normalization::UnitSum)?;
                return Ok(EigenSolve {
                    eigenpair: pair,
                    residual: resid,
                    iterations: it,
                });
            }
            for i in 0..n {
                z[i] += gamma * (hz[i] - z[i]);
            }
        }
        Err(Error::NoConvergence {
            iters: max_iter,
            residual: h.residual(z.view(), lambda),
        })
    }
}

/// Same iteration, but records the full iterate history for benchmark
/// error curves. Runs exactly `iters` steps with no convergence test.
pub fn relaxed_power_trace(
    h: &HMatrix,
    schedule: &StepSchedule,
    iters: usize,
) -> Vec<Array1<f64>> {
    let n = h.n();
    let mut z = Array1::from_elem(n, 1.0 / n as f64);
    let mut out = Vec::with_capacity(iters + 1);
    out.push(z.clone());
    for it in 1..=iters {
        let mass = z.sum();
        z.mapv_inplace(|v| v / mass);
        let gamma = schedule.gamma(it as u64);
        let hz = h.matrix().dot(&z);
        for i in 0..n {
            z[i] += gamma * (hz[i] - z[i]);
        }
        out.push(z.clone());
    }
    out
}

/// Convenience wrapper around [`PowerSolver`].
pub fn solve_power(h: &HMatrix, tol: f64, max_iter: usize) -> Result<Eigenpair> {
    Ok(PowerSolver.solve(h, tol, max_iter)?.eigenpair)
}

/// Convenience wrapper around [`RelaxedSolver`].
pub fn solve_relaxed(
    h: &HMatrix,
    schedule: StepSchedule,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair> {
    Ok(RelaxedSolver::new(schedule).solve(h, tol, max_iter)?.eigenpair)
}

/// Solver registry: resolve a strategy by its CLI name.
pub fn solver_by_name(name: &str) -> Option<Box<dyn EigenSolver>> {
    match name {
        "power" => Some(Box::new(PowerSolver)),
        "relaxed" => Some(Box::new(RelaxedSolver::default())),
        _ => None,
    }
}

/// Names of all registered solvers.
pub fn solver_names() -> &'static [&'static str] {
    &["power", "relaxed"]
}
