//! Stability analysis of the learner equilibrium: the linearization
//! D(H - λ*I - z*1ᵀ), its spectral abscissa and determinant, the three
//! sufficient conditions for strict stability, and a fuzzer probing the
//! open question of whether the linearization is strictly stable for
//! arbitrary positive diagonal D.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::klproblem::{Eigenpair, HMatrix, KlProblem, Normalization};
use crate::linalg::{eigenvalues, max_real_part, DoubleDouble, Lu, Scalar};
use crate::markov::{
    ergodicity_check, stationary_distribution, write_matrix_text, StochasticMatrix,
};
use crate::solvers::solve_power;

/// Classification margin: an equilibrium counts as strictly stable when
/// the spectral abscissa is below -EPS_STAB times the matrix scale.
pub const EPS_STAB: f64 = 1e-9;

/// Nonsingularity threshold: |det A| must exceed 1e-10 times the product
/// of row norms (Hadamard scale, invariant under the diagonal D).
pub const DET_RATIO_MIN: f64 = 1e-10;

/// Which sufficient condition for strict stability applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SufficientCondition {
    /// D is a positive multiple of the identity.
    DScalar,
    /// 1ᵀH = λ*1ᵀ: the all-ones vector is a left Perron vector.
    LeftOnesPerron,
    /// n = 2.
    TwoByTwo,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub matrix_dim: usize,
    pub lambda: f64,
    pub det: f64,
    pub nonsingular: bool,
    /// Max real part over the spectrum of D(H - λ*I - z*1ᵀ).
    pub spectral_abscissa: f64,
    /// The absolute margin -EPS_STAB * scale used for classification.
    pub margin: f64,
    pub strictly_stable: bool,
    pub sufficient_condition: SufficientCondition,
    /// Whether the borderline double-double re-check ran.
    pub refined: bool,
}

/// D(H - λ*I - z*1ᵀ) for an eigenpair in the λ-sum normalization
/// (||z*||₁ = λ*, which the derivation of the linearized field assumes).
pub fn linearization(
    h: &HMatrix,
    d: ArrayView1<'_, f64>,
    e: &Eigenpair,
) -> Result<Array2<f64>> {
    if e.normalization() != Normalization::LambdaSum {
        return Err(Error::WrongNormalization {
            expected: Normalization::LambdaSum,
            found: e.normalization(),
        });
    }
    let n = h.n();
    if d.len() != n || e.n() != n {
        return Err(Error::LengthMismatch {
            left: d.len(),
            right: n,
        });
    }
    let z = e.z();
    let lambda = e.lambda();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut v = h.get(i, j) - z[i];
            if i == j {
                v -= lambda;
            }
            a[[i, j]] = d[i] * v;
        }
    }
    Ok(a)
}

/// Max real part of the spectrum, via Hessenberg reduction + shifted QR.
pub fn spectral_abscissa(a: &Array2<f64>) -> Result<f64> {
    max_real_part(a)
}

fn inf_norm(a: &Array2<f64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn row_norm_product(a: &Array2<f64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .product()
}

/// Perron pair of H recomputed in double-double arithmetic; returns
/// (z in λ-sum normalization, λ) or None if the iteration stalls.
fn perron_pair_dd(h: &Array2<f64>) -> Option<(Vec<DoubleDouble>, DoubleDouble)> {
    let n = h.nrows();
    let hd = h.mapv(DoubleDouble::from_f64);
    let mut z = vec![DoubleDouble::from_f64(1.0 / n as f64); n];
    let mut lambda = DoubleDouble::ONE;
    let tol = DoubleDouble::from_f64(1e-28);
    for _ in 0..500_000 {
        let mut hz = vec![DoubleDouble::ZERO; n];
        for i in 0..n {
            let mut acc = DoubleDouble::ZERO;
            for j in 0..n {
                acc = acc + hd[[i, j]] * z[j];
            }
            hz[i] = acc;
        }
        let mut mass = DoubleDouble::ZERO;
        for v in &hz {
            mass = mass + *v;
        }
        lambda = mass;
        let mut diff = DoubleDouble::ZERO;
        for i in 0..n {
            let next = hz[i] / mass;
            diff = diff + (next - z[i]).abs();
            z[i] = next;
        }
        if diff < tol {
            // rescale to ||z||₁ = λ
            for v in z.iter_mut() {
                *v = *v * lambda;
            }
            return Some((z, lambda));
        }
    }
    None
}

/// Spectral abscissa of D(H - λI - z1ᵀ) rebuilt and solved entirely in
/// double-double precision. None when either stage fails to converge.
fn refined_abscissa(h: &Array2<f64>, d: &Array1<f64>) -> Option<f64> {
    let n = h.nrows();
    let (z, lambda) = perron_pair_dd(h)?;
    let mut a = Array2::from_elem((n, n), DoubleDouble::ZERO);
    for i in 0..n {
        let di = DoubleDouble::from_f64(d[i]);
        for j in 0..n {
            let mut v = DoubleDouble::from_f64(h[[i, j]]) - z[i];
            if i == j {
                v = v - lambda;
            }
            a[[i, j]] = di * v;
        }
    }
    let ev = eigenvalues(&a).ok()?;
    let mut best = f64::NEG_INFINITY;
    for (re, _) in ev {
        best = best.max(re.to_f64());
    }
    Some(best)
}

/// Full stability classification for a given (H, D) pair. The Perron
/// pair is solved to a tight residual, the abscissa is classified
/// against the relative margin, and anything inside the margin is
/// re-verified in double-double precision so that rounding alone can
/// never manufacture an unstable verdict.
pub fn stability_report_for(h: &HMatrix, d: ArrayView1<'_, f64>) -> Result<StabilityReport> {
    let n = h.n();
    let e = solve_power(h, 1e-12, 1_000_000)?;
    let e = crate::klproblem::renormalize(&e, Normalization::LambdaSum);
    let a = linearization(h, d, &e)?;
    let lu = Lu::factor(a.view())?;
    let det = lu.det();
    let nonsingular = det.abs() > DET_RATIO_MIN * row_norm_product(&a);
    let scale = inf_norm(&a).max(f64::MIN_POSITIVE);
    let margin = EPS_STAB * scale;
    let mut abscissa = spectral_abscissa(&a)?;
    let mut refined = false;
    if abscissa >= -margin {
        if let Some(better) = refined_abscissa(h.matrix(), &d.to_owned()) {
            abscissa = better;
            refined = true;
        }
    }
    let strictly_stable = abscissa < -margin;

    let d0 = d[0];
    let d_scalar = d.iter().all(|&x| (x - d0).abs() <= 1e-12 * d0.abs());
    let mut col_defect = 0.0f64;
    for j in 0..n {
        let col_sum: f64 = (0..n).map(|i| h.get(i, j)).sum();
        col_defect = col_defect.max((col_sum - e.lambda()).abs());
    }
    let left_ones = col_defect <= 1e-8 * e.lambda();
    let sufficient_condition = if d_scalar {
        SufficientCondition::DScalar
    } else if left_ones {
        SufficientCondition::LeftOnesPerron
    } else if n == 2 {
        SufficientCondition::TwoByTwo
    } else {
        SufficientCondition::None
    };

    Ok(StabilityReport {
        matrix_dim: n,
        lambda: e.lambda(),
        det,
        nonsingular,
        spectral_abscissa: abscissa,
        margin,
        strictly_stable,
        sufficient_condition,
        refined,
    })
}

/// Stability report for a problem; D defaults to the diagonal of the
/// uncontrolled chain's stationary distribution.
pub fn stability_report(
    problem: &KlProblem,
    d_override: Option<ArrayView1<'_, f64>>,
) -> Result<StabilityReport> {
    let h = crate::klproblem::build_h(problem);
    match d_override {
        Some(d) => stability_report_for(&h, d),
        None => {
            let q = stationary_distribution(problem.chain(), 1e-13)?;
            stability_report_for(&h, q.vector())
        }
    }
}

/// How the positive diagonal D is drawn for fuzz instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DMode {
    /// Diagonal of the chain's stationary distribution (the case the
    /// learner actually produces).
    Stationary,
    /// Entries log-uniform on [0.01, 1] (the full generality of the
    /// open question).
    LogUniform,
    /// A single log-uniform scalar times the identity.
    Scalar,
}

/// Instance distribution for the fuzzer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub d_mode: DMode,
    /// Erdős–Rényi support probability (a random Hamiltonian cycle is
    /// always added, self-loops with probability 1/2).
    pub density: f64,
    /// Costs drawn uniformly on [0, cost_max].
    pub cost_max: f64,
    /// β drawn log-uniformly on [beta_min, beta_max].
    pub beta_min: f64,
    pub beta_max: f64,
    /// Rescale columns of H so that 1ᵀH = λ*1ᵀ with λ* = 1.
    pub column_rescale: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            n_min: 3,
            n_max: 12,
            d_mode: DMode::LogUniform,
            density: 0.5,
            cost_max: 5.0,
            beta_min: 0.1,
            beta_max: 10.0,
            column_rescale: false,
        }
    }
}

impl FuzzConfig {
    /// Tame ranges for the guaranteed-stable family checks: coupling
    /// factors stay far from underflow so true spectral gaps stay far
    /// from the classification margin.
    pub fn tame() -> Self {
        Self {
            density: 0.6,
            cost_max: 2.0,
            beta_min: 0.5,
            beta_max: 2.0,
            ..Self::default()
        }
    }
}

/// One fuzzed (H, D) instance.
#[derive(Debug, Clone)]
pub struct FuzzInstance {
    pub h: HMatrix,
    pub d: Array1<f64>,
    pub q: StochasticMatrix,
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random::<f64>() * (hi.ln() - lo.ln()) + lo.ln()).exp()
}

/// Draws a random instance: sparse ergodic support, uniform weights on
/// [0.5, 1.5] row-normalized, random costs and β, D per mode.
pub fn random_instance<R: Rng + ?Sized>(cfg: &FuzzConfig, rng: &mut R) -> Result<FuzzInstance> {
    let n = rng.random_range(cfg.n_min..=cfg.n_max);
    let mut support = Array2::from_elem((n, n), false);
    for i in 0..n {
        for j in 0..n {
            if rng.random::<f64>() < cfg.density {
                support[[i, j]] = true;
            }
        }
    }
    // random Hamiltonian cycle guarantees strong connectivity
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    for i in 0..n {
        support[[perm[i], perm[(i + 1) % n]]] = true;
    }
    for i in 0..n {
        if rng.random::<f64>() < 0.5 {
            support[[i, i]] = true;
        }
    }
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            if support[[i, j]] {
                let w = 0.5 + rng.random::<f64>();
                q[[i, j]] = w;
                sum += w;
            }
        }
        for j in 0..n {
            q[[i, j]] /= sum;
        }
    }
    let q = StochasticMatrix::new(q)?;
    let beta = log_uniform(rng, cfg.beta_min, cfg.beta_max);
    let mut h = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if q.get(i, j) > 0.0 {
                let c = rng.random::<f64>() * cfg.cost_max;
                h[[i, j]] = (-beta * c).exp() * q.get(i, j);
            }
        }
    }
    if cfg.column_rescale {
        for j in 0..n {
            let col_sum: f64 = (0..n).map(|i| h[[i, j]]).sum();
            if col_sum > 0.0 {
                for i in 0..n {
                    h[[i, j]] /= col_sum;
                }
            }
        }
    }
    let d = match cfg.d_mode {
        DMode::Stationary => stationary_distribution(&q, 1e-12)?.vector().to_owned(),
        DMode::LogUniform => {
            Array1::from_iter((0..n).map(|_| log_uniform(rng, 0.01, 1.0)))
        }
        DMode::Scalar => {
            let s = log_uniform(rng, 0.01, 1.0);
            Array1::from_elem(n, s)
        }
    };
    Ok(FuzzInstance {
        h: HMatrix::from_raw(h)?,
        d,
        q,
    })
}

/// NDJSON record for one evaluated instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: u64,
    pub seed: u64,
    pub n: usize,
    pub spectral_abscissa: f64,
    pub det: f64,
    pub sufficient_condition: SufficientCondition,
    pub stable: bool,
    pub nonsingular: bool,
    pub refined: bool,
}

/// A candidate counterexample with full matrices in the text exchange
/// format, ready for independent re-examination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub index: u64,
    pub seed: u64,
    pub n: usize,
    pub spectral_abscissa: f64,
    pub margin: f64,
    pub lambda: f64,
    pub h_text: String,
    pub d_text: String,
    pub z_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub requested: u64,
    pub evaluated: u64,
    /// Instances skipped because an iteration failed to converge.
    pub skipped: u64,
    pub stable_count: u64,
    pub records: Vec<InstanceRecord>,
    pub candidates: Vec<Candidate>,
}

/// Evaluates `count` seeded random instances in parallel; every instance
/// that cannot be certified strictly stable (after the double-double
/// re-check) is emitted as a candidate with its matrices serialized.
/// The fuzzer reports; it never asserts the conjecture.
pub fn conjecture_fuzz(cfg: &FuzzConfig, count: u64, seed: u64) -> FuzzSummary {
    let results: Vec<Option<(InstanceRecord, Option<Candidate>)>> = (0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index + 1);
            let inst = match random_instance(cfg, &mut rng) {
                Ok(i) => i,
                Err(_) => return None,
            };
            let report = match stability_report_for(&inst.h, inst.d.view()) {
                Ok(r) => r,
                Err(_) => return None,
            };
            let record = InstanceRecord {
                index,
                seed,
                n: report.matrix_dim,
                spectral_abscissa: report.spectral_abscissa,
                det: report.det,
                sufficient_condition: report.sufficient_condition,
                stable: report.strictly_stable,
                nonsingular: report.nonsingular,
                refined: report.refined,
            };
            let candidate = if !report.strictly_stable {
                let e = solve_power(&inst.h, 1e-12, 1_000_000).ok();
                let z_text = e
                    .map(|e| {
                        let zc = crate::klproblem::renormalize(&e, Normalization::LambdaSum);
                        let m = Array2::from_shape_vec((1, zc.n()), zc.z().to_vec()).unwrap();
                        write_matrix_text(m.view())
                    })
                    .unwrap_or_default();
                let dm = Array2::from_shape_vec((1, inst.d.len()), inst.d.to_vec()).unwrap();
                Some(Candidate {
                    index,
                    seed,
                    n: report.matrix_dim,
                    spectral_abscissa: report.spectral_abscissa,
                    margin: report.margin,
                    lambda: report.lambda,
                    h_text: write_matrix_text(inst.h.matrix().view()),
                    d_text: write_matrix_text(dm.view()),
                    z_text,
                })
            } else {
                None
            };
            Some((record, candidate))
        })
        .collect();

    let mut summary = FuzzSummary {
        requested: count,
        evaluated: 0,
        skipped: 0,
        stable_count: 0,
        records: Vec::new(),
        candidates: Vec::new(),
    };
    for r in results {
        match r {
            Some((record, candidate)) => {
                summary.evaluated += 1;
                if record.stable {
                    summary.stable_count += 1;
                }
                summary.records.push(record);
                if let Some(c) = candidate {
                    summary.candidates.push(c);
                }
            }
            None => summary.skipped += 1,
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klproblem::{build_h, KlProblem};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn two_state_problem() -> KlProblem {
        let q = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        KlProblem::with_state_costs(q, array![0.0, 2.0f64.ln()].view(), 1.0).unwrap()
    }

    #[test]
    fn linearization_two_state_is_scaled_identity() {
        let p = two_state_problem();
        let h = build_h(&p);
        let e = Eigenpair::new(array![0.5, 0.25], 0.75, Normalization::LambdaSum).unwrap();
        let a = linearization(&h, array![0.5, 0.5].view(), &e).unwrap();
        let expect = array![[-0.375, 0.0], [0.0, -0.375]];
        for (x, y) in a.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn linearization_rejects_unit_sum() {
        let p = two_state_problem();
        let h = build_h(&p);
        let e = Eigenpair::new(array![2.0 / 3.0, 1.0 / 3.0], 0.75, Normalization::UnitSum).unwrap();
        assert!(matches!(
            linearization(&h, array![0.5, 0.5].view(), &e),
            Err(Error::WrongNormalization { .. })
        ));
    }

    #[test]
    fn linearization_stochastic_h_substitution() {
        // H = q (stochastic), λ* = 1, z* = 1/n 1: A = D(q - I - (1/n) 1 1ᵀ)
        let q = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let p = KlProblem::new(q, Array2::zeros((2, 2)), 1.0).unwrap();
        let h = build_h(&p);
        let e = Eigenpair::new(array![0.5, 0.5], 1.0, Normalization::LambdaSum).unwrap();
        let a = linearization(&h, array![1.0, 1.0].view(), &e).unwrap();
        let expect = array![[-1.0, 0.0], [0.0, -1.0]];
        for (x, y) in a.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn abscissa_examples() {
        assert_abs_diff_eq!(
            spectral_abscissa(&array![[-0.375, 0.0], [0.0, -0.375]]).unwrap(),
            -0.375
        );
        assert_abs_diff_eq!(
            spectral_abscissa(&array![[0.0, -1.0], [1.0, 0.0]]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            spectral_abscissa(&array![[-1.0, 4.0, 2.0], [0.0, -2.0, 1.0], [0.0, 0.0, 3.0]])
                .unwrap(),
            3.0
        );
    }

    #[test]
    fn report_two_state_problem_is_stable() {
        let p = two_state_problem();
        let r = stability_report(&p, None).unwrap();
        assert!(r.strictly_stable);
        assert!(r.nonsingular);
        // uniform chain: stationary is uniform, so D is scalar here
        assert_eq!(r.sufficient_condition, SufficientCondition::DScalar);
        assert_abs_diff_eq!(r.spectral_abscissa, -0.375, epsilon = 1e-10);
    }

    #[test]
    fn report_classifies_two_by_two_with_generic_d() {
        let p = two_state_problem();
        let r = stability_report(&p, Some(array![0.3, 0.9].view())).unwrap();
        assert_eq!(r.sufficient_condition, SufficientCondition::TwoByTwo);
        assert!(r.strictly_stable);
    }

    #[test]
    fn report_classifies_left_ones_perron() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = FuzzConfig {
            column_rescale: true,
            n_min: 5,
            n_max: 5,
            ..FuzzConfig::tame()
        };
        let inst = random_instance(&cfg, &mut rng).unwrap();
        let r = stability_report_for(&inst.h, inst.d.view()).unwrap();
        assert_eq!(r.sufficient_condition, SufficientCondition::LeftOnesPerron);
        assert!(r.strictly_stable);
        assert_abs_diff_eq!(r.lambda, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fuzz_zero_count_is_empty() {
        let s = conjecture_fuzz(&FuzzConfig::default(), 0, 1);
        assert_eq!(s.requested, 0);
        assert_eq!(s.evaluated, 0);
        assert!(s.records.is_empty());
        assert!(s.candidates.is_empty());
    }

    #[test]
    fn fuzz_is_deterministic_per_seed() {
        let cfg = FuzzConfig::tame();
        let a = conjecture_fuzz(&cfg, 20, 7);
        let b = conjecture_fuzz(&cfg, 20, 7);
        assert_eq!(a.evaluated, b.evaluated);
        for (x, y) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.spectral_abscissa.to_bits(), y.spectral_abscissa.to_bits());
        }
    }

    #[test]
    fn tame_two_by_two_family_is_all_stable() {
        let cfg = FuzzConfig {
            n_min: 2,
            n_max: 2,
            ..FuzzConfig::tame()
        };
        let s = conjecture_fuzz(&cfg, 50, 11);
        assert_eq!(s.evaluated, 50);
        assert_eq!(s.stable_count, 50);
        assert!(s.candidates.is_empty());
    }
}
