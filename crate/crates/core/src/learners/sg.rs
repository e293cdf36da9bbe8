//! The stochastic gradient companion algorithm: updates component
//! x_{k-1} of θ using the partial derivative observed at x_k. Its mean
//! field is -R∇h with r_ij = q_i q_ij, which is why the diagonostics on
//! R (symmetry, laziness, positive definiteness) live here too.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::Result;
use crate::linalg::eigenvalues;
use crate::markov::{sample_next, stationary_distribution, StochasticMatrix};
use crate::schedule::StepSchedule;

/// One update: θ(x_{k-1}) -= γ ∂h/∂θ^{(x_k)}(θ). Note the deliberate
/// index mismatch: observe at the arrival state, update the departure.
pub fn sg_step<G>(theta: &Array1<f64>, grad: G, pair: (usize, usize), gamma: f64) -> Array1<f64>
where
    G: Fn(&Array1<f64>, usize) -> f64,
{
    let (x_prev, x_cur) = pair;
    let g = grad(theta, x_cur);
    let mut out = theta.clone();
    out[x_prev] -= gamma * g;
    out
}

/// Drives the gradient algorithm along a chain trajectory.
pub fn run_sg<G>(
    chain: &StochasticMatrix,
    grad: G,
    theta0: Array1<f64>,
    schedule: &StepSchedule,
    steps: u64,
    seed: u64,
) -> Array1<f64>
where
    G: Fn(&Array1<f64>, usize) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = theta0;
    let mut x = rng.random_range(0..chain.n());
    for k in 1..=steps {
        let y = sample_next(chain, x, &mut rng);
        let gamma = schedule.gamma(k);
        let g = grad(&theta, y);
        theta[x] -= gamma * g;
        x = y;
    }
    theta
}

/// Diagnostics on R = diag(q) P: whether the chain is reversible,
/// strictly lazy, and whether the symmetric part of R is positive
/// definite (the assumption behind the -R∇h mean field analysis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RPosdefReport {
    pub detailed_balance: bool,
    pub strictly_lazy: bool,
    pub r_posdef: bool,
}

pub fn check_r_posdef(p: &StochasticMatrix) -> Result<RPosdefReport> {
    let n = p.n();
    let q = stationary_distribution(p, 1e-13)?;
    let mut r = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            r[[i, j]] = q.get(i) * p.get(i, j);
        }
    }
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut sym_defect = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            sym_defect = sym_defect.max((r[[i, j]] - r[[j, i]]).abs());
        }
    }
    let detailed_balance = sym_defect <= 1e-10 * scale.max(1e-300);
    let strictly_lazy = (0..n).all(|i| p.get(i, i) > 0.5);
    // smallest eigenvalue of (R + R^T)/2
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = 0.5 * (r[[i, j]] + r[[j, i]]);
        }
    }
    let ev = eigenvalues(&s)?;
    let min_eig = ev.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let r_posdef = min_eig > 1e-12 * scale.max(1e-300);
    Ok(RPosdefReport {
        detailed_balance,
        strictly_lazy,
        r_posdef,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn step_at_equilibrium_is_identity() {
        let theta = array![1.0, 2.0];
        let out = sg_step(&theta, |_, _| 0.0, (0, 1), 0.1);
        assert_eq!(out, theta);
    }

    #[test]
    fn step_quadratic_hand_case() {
        // h = ||theta||^2 / 2: partial at j is theta_j
        let theta = array![1.0, 2.0];
        let out = sg_step(&theta, |t, j| t[j], (0, 1), 0.1);
        assert_abs_diff_eq!(out[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn lazy_symmetric_chain_has_posdef_r() {
        let p = StochasticMatrix::new(array![[0.75, 0.25], [0.25, 0.75]]).unwrap();
        let rep = check_r_posdef(&p).unwrap();
        assert!(rep.detailed_balance);
        assert!(rep.strictly_lazy);
        assert!(rep.r_posdef);
    }

    #[test]
    fn three_cycle_is_not_reversible() {
        let p = StochasticMatrix::new(array![
            [0.1, 0.9, 0.0],
            [0.0, 0.1, 0.9],
            [0.9, 0.0, 0.1]
        ])
        .unwrap();
        let rep = check_r_posdef(&p).unwrap();
        assert!(!rep.detailed_balance);
    }

    #[test]
    fn lazy_boundary_fails_both_tests() {
        // q_ii = 1/2 exactly: not strictly lazy, R singular
        let p = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let rep = check_r_posdef(&p).unwrap();
        assert!(rep.detailed_balance);
        assert!(!rep.strictly_lazy);
        assert!(!rep.r_posdef);
    }
}
