//! KL control problems and their exact solution: the nonnegative matrix
//! H with h_ij = exp(-β c_ij) q_ij, its Perron eigenpair, the optimal
//! controlled policy, value function and average cost.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{
    check_detailed_balance, ergodicity_check, stationary_distribution, ProbVector,
    StochasticMatrix,
};

/// Shape of the transition-cost matrix. Costs are always stored as a
/// full n×n matrix; the shape flag only gates the detailed-balance
/// closed forms of [`controlled_stationary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostShape {
    Transition,
    /// c(j|i) = c(i): the cost attaches to the departure state.
    State,
    /// c(j|i) = c(i|j).
    Symmetric,
}

/// An ergodic KL control problem (q, c, β).
#[derive(Debug, Clone)]
pub struct KlProblem {
    q: StochasticMatrix,
    c: Array2<f64>,
    beta: f64,
    cost_shape: CostShape,
}

impl KlProblem {
    /// General transition costs c(j|i).
    pub fn new(q: StochasticMatrix, c: Array2<f64>, beta: f64) -> Result<Self> {
        Self::with_shape(q, c, beta, CostShape::Transition)
    }

    /// State costs c(i), attached to the departure state: c(j|i) = c(i).
    pub fn with_state_costs(q: StochasticMatrix, c: ArrayView1<'_, f64>, beta: f64) -> Result<Self> {
        let n = q.n();
        if c.len() != n {
            return Err(Error::LengthMismatch {
                left: c.len(),
                right: n,
            });
        }
        let mut cm = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                cm[[i, j]] = c[i];
            }
        }
        Self::with_shape(q, cm, beta, CostShape::State)
    }

    /// Symmetric transition costs c(j|i) = c(i|j).
    pub fn with_symmetric_costs(q: StochasticMatrix, c: Array2<f64>, beta: f64) -> Result<Self> {
        let n = q.n();
        for i in 0..n {
            for j in i + 1..n {
                if (c[[i, j]] - c[[j, i]]).abs() > 1e-12 {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Self::with_shape(q, c, beta, CostShape::Symmetric)
    }

    pub fn with_shape(
        q: StochasticMatrix,
        c: Array2<f64>,
        beta: f64,
        cost_shape: CostShape,
    ) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::BetaNonPositive(beta));
        }
        let n = q.n();
        if c.dim() != (n, n) {
            return Err(Error::NotSquare {
                rows: c.nrows(),
                cols: c.ncols(),
            });
        }
        for ((i, j), &v) in c.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::CostNotFinite { row: i, col: j });
            }
        }
        let erg = ergodicity_check(&q);
        if !erg.is_ergodic() {
            return Err(Error::NotErgodic {
                irreducible: erg.irreducible,
                aperiodic: erg.aperiodic,
            });
        }
        match cost_shape {
            CostShape::State => {
                for i in 0..n {
                    for j in 1..n {
                        if (c[[i, j]] - c[[i, 0]]).abs() > 1e-12 {
                            return Err(Error::NotStateCost);
                        }
                    }
                }
            }
            CostShape::Symmetric => {
                for i in 0..n {
                    for j in i + 1..n {
                        if (c[[i, j]] - c[[j, i]]).abs() > 1e-12 {
                            return Err(Error::NotSymmetric);
                        }
                    }
                }
            }
            CostShape::Transition => {}
        }
        Ok(Self {
            q,
            c,
            beta,
            cost_shape,
        })
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn chain(&self) -> &StochasticMatrix {
        &self.q
    }

    pub fn costs(&self) -> &Array2<f64> {
        &self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cost_shape(&self) -> CostShape {
        self.cost_shape
    }

    /// exp(-β c(j|i)), the per-transition cost factor observed by learners.
    pub fn cost_factor(&self, i: usize, j: usize) -> f64 {
        (-self.beta * self.c[[i, j]]).exp()
    }

    /// The full matrix of cost factors exp(-β c).
    pub fn cost_factors(&self) -> Array2<f64> {
        self.c.mapv(|c| (-self.beta * c).exp())
    }

    /// λ_min = min over realizable transitions (q_ij > 0) of exp(-β c_ij)/2.
    ///
    /// Restricted to the support of q: prohibitive costs on impossible
    /// transitions would make the floor uselessly tiny, and only
    /// realizable transitions enter H.
    pub fn lambda_min(&self) -> f64 {
        let n = self.n();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if self.q.get(i, j) > 0.0 {
                    m = m.min(self.cost_factor(i, j));
                }
            }
        }
        m / 2.0
    }

    /// M = max_{i,j} exp(-β c_ij) over realizable transitions; the upper
    /// edge of the invariant box that contains learner iterates.
    pub fn m_bound(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if self.q.get(i, j) > 0.0 {
                    m = m.max(self.cost_factor(i, j));
                }
            }
        }
        m
    }
}

/// The nonnegative matrix h_ij = exp(-β c_ij) q_ij whose Perron
/// eigenpair solves the control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HMatrix {
    h: Array2<f64>,
}

impl HMatrix {
    /// Wraps a raw nonnegative square matrix (for stability studies on
    /// general H, not only those built from a problem).
    pub fn from_raw(h: Array2<f64>) -> Result<Self> {
        let (rows, cols) = h.dim();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        for ((i, j), &v) in h.indexed_iter() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        Ok(Self { h })
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.h[[i, j]]
    }

    pub fn nnz(&self) -> usize {
        self.h.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn is_irreducible(&self) -> bool {
        // strong connectivity of the positive pattern; renormalizing rows
        // turns it into a chain question we already know how to answer
        let n = self.n();
        let mut rows_ok = true;
        let mut p = self.h.clone();
        for mut row in p.rows_mut() {
            let s: f64 = row.sum();
            if s <= 0.0 {
                rows_ok = false;
                break;
            }
            row.mapv_inplace(|v| v / s);
        }
        if !rows_ok {
            return false;
        }
        match StochasticMatrix::new(p) {
            Ok(sm) => ergodicity_check(&sm).irreducible,
            Err(_) => false,
        }
    }

    /// Relative l1 residual ||Hz - λz||₁ / ||z||₁.
    pub fn residual(&self, z: ArrayView1<'_, f64>, lambda: f64) -> f64 {
        let hz = self.h.dot(&z);
        let num: f64 = hz
            .iter()
            .zip(z.iter())
            .map(|(a, b)| (a - lambda * b).abs())
            .sum();
        let den: f64 = z.iter().map(|v| v.abs()).sum();
        num / den
    }
}

/// h_ij = exp(-β c(j|i)) q(j|i); the zero pattern equals q's.
pub fn build_h(problem: &KlProblem) -> HMatrix {
    let n = problem.n();
    let mut h = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let q = problem.chain().get(i, j);
            if q > 0.0 {
                h[[i, j]] = problem.cost_factor(i, j) * q;
            }
        }
    }
    HMatrix { h }
}

/// Which scaling an eigenpair carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// ||z||₁ = 1 (the value-function normalization).
    UnitSum,
    /// ||z||₁ = λ (the learner-equilibrium normalization).
    LambdaSum,
}

/// A positive Perron eigenpair (z, λ) with declared normalization.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    z: Array1<f64>,
    lambda: f64,
    normalization: Normalization,
}

impl Eigenpair {
    pub fn new(z: Array1<f64>, lambda: f64, normalization: Normalization) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::LambdaNonPositive(lambda));
        }
        if z.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "eigenvector must be strictly positive".into(),
            ));
        }
        let sum = z.sum();
        let target = match normalization {
            Normalization::UnitSum => 1.0,
            Normalization::LambdaSum => lambda,
        };
        if (sum - target).abs() > 1e-12 * target.max(1.0) {
            return Err(Error::WrongNormalization {
                expected: normalization,
                found: if (sum - 1.0).abs() < (sum - lambda).abs() {
                    Normalization::UnitSum
                } else {
                    Normalization::LambdaSum
                },
            });
        }
        Ok(Self {
            z,
            lambda,
            normalization,
        })
    }

    pub fn z(&self) -> ArrayView1<'_, f64> {
        self.z.view()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }
}

/// Rescales the eigenvector so the target normalization holds; λ is untouched.
pub fn renormalize(e: &Eigenpair, target: Normalization) -> Eigenpair {
    let sum = e.z.sum();
    let want = match target {
        Normalization::UnitSum => 1.0,
        Normalization::LambdaSum => e.lambda,
    };
    Eigenpair {
        z: e.z.mapv(|v| v * want / sum),
        lambda: e.lambda,
        normalization: target,
    }
}

/// The optimal controlled transition probabilities together with the
/// row-sum defect absorbed by the final renormalization.
#[derive(Debug, Clone)]
pub struct OptimalPolicy {
    pub matrix: StochasticMatrix,
    /// max_i |Σ_j p_ij - 1| before rows were renormalized.
    pub row_defect: f64,
}

/// p*(j|i) = q(j|i) exp(-β c(j|i)) z_j / (λ z_i), rows renormalized to
/// exactly 1 so the policy can be sampled downstream.
pub fn optimal_policy(problem: &KlProblem, e: &Eigenpair) -> Result<OptimalPolicy> {
    let h = build_h(problem);
    optimal_policy_from_h(&h, e)
}

pub fn optimal_policy_from_h(h: &HMatrix, e: &Eigenpair) -> Result<OptimalPolicy> {
    let n = h.n();
    if e.n() != n {
        return Err(Error::LengthMismatch {
            left: e.n(),
            right: n,
        });
    }
    let resid = h.residual(e.z(), e.lambda());
    let max = 5.0 * RESIDUAL_ACCEPT;
    if resid > max {
        return Err(Error::ResidualTooLarge { residual: resid, max });
    }
    let z = e.z();
    let mut p = Array2::zeros((n, n));
    let mut defect = 0.0f64;
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let v = h.get(i, j) * z[j] / (e.lambda() * z[i]);
            p[[i, j]] = v;
            sum += v;
        }
        defect = defect.max((sum - 1.0).abs());
        for j in 0..n {
            p[[i, j]] /= sum;
        }
    }
    Ok(OptimalPolicy {
        matrix: StochasticMatrix::new(p)?,
        row_defect: defect,
    })
}

/// Residual level below which an eigenpair is accepted as solving a
/// problem (5x the default solver tolerance).
const RESIDUAL_ACCEPT: f64 = 2e-8;

/// Φ_i = -ln(z_i)/β under the unit-sum normalization (enforced here).
pub fn value_function(e: &Eigenpair, beta: f64) -> Array1<f64> {
    let unit = renormalize(e, Normalization::UnitSum);
    unit.z.mapv(|z| -z.ln() / beta)
}

/// ρ = -ln(λ)/β, the optimal average cost per transition.
pub fn average_cost(lambda: f64, beta: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::LambdaNonPositive(lambda));
    }
    Ok(-lambda.ln() / beta)
}

/// Shifts every cost by δ = ln(λ*)/β so the spectral radius becomes 1
/// (adding δ to every cost multiplies H by e^{-βδ} exactly).
pub fn normalize_costs(problem: &KlProblem, tol: f64, max_iter: usize) -> Result<KlProblem> {
    let h = build_h(problem);
    let e = crate::solvers::solve_power(&h, tol, max_iter)?;
    let delta = e.lambda().ln() / problem.beta();
    let c = problem.costs().mapv(|c| c + delta);
    KlProblem::with_shape(problem.chain().clone(), c, problem.beta(), problem.cost_shape())
}

/// Closed-form Perron pair for rank-one dynamics q_ij = q_j with state
/// costs: λ* = Σ_j q_j e^{-β c_j}, z*_i ∝ e^{-β c_i}.
pub fn rank_one_solution(
    qvec: &ProbVector,
    cstate: ArrayView1<'_, f64>,
    beta: f64,
) -> Result<Eigenpair> {
    if !(beta > 0.0) {
        return Err(Error::BetaNonPositive(beta));
    }
    if qvec.n() != cstate.len() {
        return Err(Error::LengthMismatch {
            left: qvec.n(),
            right: cstate.len(),
        });
    }
    let weights = cstate.mapv(|c| (-beta * c).exp());
    let lambda: f64 = qvec
        .vector()
        .iter()
        .zip(weights.iter())
        .map(|(q, w)| q * w)
        .sum();
    let sum = weights.sum();
    Eigenpair::new(weights.mapv(|w| w / sum), lambda, Normalization::UnitSum)
}

/// Closed-form stationary distribution of the optimal controlled chain
/// when q is reversible (Prop. 2.2): p_i ∝ q_i e^{β c(i)} (z_i)² for
/// state costs, p_i ∝ q_i (z_i)² for symmetric costs.
pub fn controlled_stationary(problem: &KlProblem, e: &Eigenpair) -> Result<ProbVector> {
    let q = problem.chain();
    let pi = stationary_distribution(q, 1e-13)?;
    let defect = crate::markov::detailed_balance_defect(q, &pi);
    if defect > 1e-10 {
        return Err(Error::NotReversible { defect });
    }
    let z = e.z();
    let n = problem.n();
    let mut out = Array1::zeros(n);
    match problem.cost_shape() {
        CostShape::State => {
            for i in 0..n {
                let ci = problem.costs()[[i, 0]];
                out[i] = pi.get(i) * (problem.beta() * ci).exp() * z[i] * z[i];
            }
        }
        CostShape::Symmetric => {
            for i in 0..n {
                out[i] = pi.get(i) * z[i] * z[i];
            }
        }
        CostShape::Transition => return Err(Error::NotStateCost),
    }
    ProbVector::normalized(out)
}

/// Serialized problem document: `{"n", "q", "c", "beta", "cost_shape"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub q: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub beta: f64,
    pub cost_shape: CostShape,
}

impl ProblemFile {
    pub fn from_problem(p: &KlProblem) -> Self {
        let n = p.n();
        let to_nested = |a: &Array2<f64>| -> Vec<Vec<f64>> {
            a.rows().into_iter().map(|r| r.to_vec()).collect()
        };
        Self {
            n,
            q: to_nested(&p.chain().matrix().to_owned()),
            c: to_nested(p.costs()),
            beta: p.beta(),
            cost_shape: p.cost_shape(),
        }
    }

    pub fn into_problem(self) -> Result<KlProblem> {
        let n = self.n;
        let flatten = |rows: Vec<Vec<f64>>, what: &str| -> Result<Array2<f64>> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("{what} is not an {n}x{n} matrix")));
            }
            Ok(Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect())
                .expect("shape checked above"))
        };
        let q = StochasticMatrix::new(flatten(self.q, "q")?)?;
        let c = flatten(self.c, "c")?;
        KlProblem::with_shape(q, c, self.beta, self.cost_shape)
    }
}

/// Serialized eigenpair document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenpairFile {
    pub lambda: f64,
    pub z: Vec<f64>,
    pub normalization: Normalization,
}

impl EigenpairFile {
    pub fn from_eigenpair(e: &Eigenpair) -> Self {
        Self {
            lambda: e.lambda(),
            z: e.z().to_vec(),
            normalization: e.normalization(),
        }
    }

    pub fn into_eigenpair(self) -> Result<Eigenpair> {
        Eigenpair::new(Array1::from_vec(self.z), self.lambda, self.normalization)
    }
}
