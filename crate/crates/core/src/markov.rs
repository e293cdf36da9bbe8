//! Finite Markov chain primitives: validated stochastic matrices,
//! ergodicity checks, stationary distributions, sampling and distances.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Lu;

/// Tolerance on row sums and probability-vector sums.
pub const PROB_TOL: f64 = 1e-12;

/// Largest state count for which the stationary distribution is obtained
/// by a direct linear solve; power iteration on the transpose above that.
pub const DIRECT_SOLVE_LIMIT: usize = 64;

/// Row-stochastic transition probabilities; `p[[i, j]]` is the
/// probability of jumping i -> j.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    p: Array2<f64>,
}

impl StochasticMatrix {
    /// Validates and wraps a raw square matrix (`validate_stochastic`).
    pub fn new(raw: Array2<f64>) -> Result<Self> {
        let (rows, cols) = raw.dim();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        for ((i, j), &v) in raw.indexed_iter() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        for (i, row) in raw.rows().into_iter().enumerate() {
            let sum: f64 = row.sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::RowSumMismatch {
                    row: i,
                    sum,
                    tol: PROB_TOL,
                });
            }
        }
        Ok(Self { p: raw })
    }

    /// As [`new`](Self::new) but rescales each row to sum exactly 1 first.
    /// Off by default everywhere; surfaces data errors instead of hiding them.
    pub fn new_renormalized(mut raw: Array2<f64>) -> Result<Self> {
        for mut row in raw.rows_mut() {
            let sum: f64 = row.sum();
            if sum <= 0.0 {
                return Err(Error::InvalidInput("row with nonpositive mass".into()));
            }
            row.mapv_inplace(|v| v / sum);
        }
        Self::new(raw)
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[[i, j]]
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.p.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.p.row(i)
    }

    /// Number of structurally possible transitions.
    pub fn nnz(&self) -> usize {
        self.p.iter().filter(|&&v| v > 0.0).count()
    }
}

/// A probability distribution over states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    v: Array1<f64>,
}

impl ProbVector {
    pub fn new(v: Array1<f64>) -> Result<Self> {
        for (i, &x) in v.iter().enumerate() {
            if x < 0.0 || !x.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: 0,
                    value: x,
                });
            }
        }
        let sum = v.sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::RowSumMismatch {
                row: 0,
                sum,
                tol: PROB_TOL,
            });
        }
        Ok(Self { v })
    }

    /// Normalizes a nonnegative vector with positive mass.
    pub fn normalized(mut v: Array1<f64>) -> Result<Self> {
        let sum = v.sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot normalize vector with mass {sum}"
            )));
        }
        v.mapv_inplace(|x| x / sum);
        Self::new(v)
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> ArrayView1<'_, f64> {
        self.v.view()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.v[i]
    }
}

/// Distribution of a consecutive state pair (X_{k-1}, X_k).
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    m: Array2<f64>,
}

impl PairDistribution {
    pub fn new(m: Array2<f64>) -> Result<Self> {
        for ((i, j), &v) in m.indexed_iter() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        let sum = m.sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::RowSumMismatch {
                row: 0,
                sum,
                tol: PROB_TOL,
            });
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.m.view()
    }

    /// Total variation distance to another pair distribution.
    pub fn tv_distance(&self, other: &PairDistribution) -> Result<f64> {
        if self.m.dim() != other.m.dim() {
            return Err(Error::LengthMismatch {
                left: self.m.nrows(),
                right: other.m.nrows(),
            });
        }
        Ok(0.5
            * self
                .m
                .iter()
                .zip(other.m.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ergodicity {
    pub irreducible: bool,
    pub aperiodic: bool,
}

impl Ergodicity {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

/// Strongly connected components of the positive-entry digraph
/// (Kosaraju: forward DFS order, then reverse-graph sweeps).
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut radj = vec![Vec::new(); n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            radj[v].push(u);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // iterative post-order DFS
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (u, ref mut idx)) = stack.last_mut() {
            if *idx < adj[u].len() {
                let v = adj[u][*idx];
                *idx += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![root];
        comp[root] = id;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        comps.push(members);
    }
    comps
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Irreducibility (strong connectivity) and aperiodicity (gcd of cycle
/// lengths, computed per strongly connected component via BFS levels).
pub fn ergodicity_check(p: &StochasticMatrix) -> Ergodicity {
    let n = p.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| p.get(i, j) > 0.0).collect())
        .collect();
    let comps = strongly_connected_components(&adj);
    let irreducible = comps.len() == 1;

    // a component's period is gcd(level[u] + 1 - level[v]) over its edges;
    // components without any internal edge have no cycles through them
    let mut comp_of = vec![usize::MAX; n];
    for (id, members) in comps.iter().enumerate() {
        for &u in members {
            comp_of[u] = id;
        }
    }
    let mut aperiodic = true;
    for (id, members) in comps.iter().enumerate() {
        let has_edge = members
            .iter()
            .any(|&u| adj[u].iter().any(|&v| comp_of[v] == id));
        if !has_edge {
            continue;
        }
        let root = members[0];
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp_of[v] != id {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    let diff = (level[u] + 1).abs_diff(level[v]);
                    g = gcd(g, diff);
                }
            }
        }
        if g != 1 {
            aperiodic = false;
        }
    }
    Ergodicity {
        irreducible,
        aperiodic,
    }
}

/// Unique stationary distribution q with `q^T P = q^T` of an ergodic chain.
///
/// Direct dense solve for n <= [`DIRECT_SOLVE_LIMIT`], transpose power
/// iteration above. The returned vector always satisfies
/// `||q^T P - q^T||_1 <= tol` and has strictly positive entries.
pub fn stationary_distribution(p: &StochasticMatrix, tol: f64) -> Result<ProbVector> {
    let erg = ergodicity_check(p);
    if !erg.is_ergodic() {
        return Err(Error::NotErgodic {
            irreducible: erg.irreducible,
            aperiodic: erg.aperiodic,
        });
    }
    let n = p.n();
    let q = if n <= DIRECT_SOLVE_LIMIT {
        // (P^T - I) q = 0 with the last balance equation replaced by sum = 1
        let mut a = p.matrix().t().to_owned();
        for i in 0..n {
            a[[i, i]] -= 1.0;
        }
        for j in 0..n {
            a[[n - 1, j]] = 1.0;
        }
        let mut b = Array1::zeros(n);
        b[n - 1] = 1.0;
        let lu = Lu::factor(a.view())?;
        lu.solve(b.view())?
    } else {
        let mut q = Array1::from_elem(n, 1.0 / n as f64);
        let pt = p.matrix().t().to_owned();
        let max_iter = 1_000_000usize;
        let mut converged = false;
        for _ in 0..max_iter {
            let next = pt.dot(&q);
            let resid: f64 = next.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
            q = next;
            let mass = q.sum();
            q.mapv_inplace(|x| x / mass);
            if resid <= 0.5 * tol {
                converged = true;
                break;
            }
        }
        if !converged {
            let next = pt.dot(&q);
            let resid: f64 = next.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
            return Err(Error::NoConvergence {
                iters: max_iter,
                residual: resid,
            });
        }
        q
    };
    let q = q.mapv(|x| x.max(0.0));
    let q = ProbVector::normalized(q)?;
    let resid: f64 = p
        .matrix()
        .t()
        .dot(&q.vector())
        .iter()
        .zip(q.vector().iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    if resid > tol {
        return Err(Error::NoConvergence {
            iters: 0,
            residual: resid,
        });
    }
    if q.vector().iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidInput(
            "stationary distribution has a nonpositive entry".into(),
        ));
    }
    Ok(q)
}

/// Draws the next state from row i by inverse-CDF sampling.
pub fn sample_next<R: Rng + ?Sized>(p: &StochasticMatrix, i: usize, rng: &mut R) -> usize {
    sample_row(p.row(i), rng)
}

/// Inverse-CDF draw from an arbitrary probability row.
pub fn sample_row<R: Rng + ?Sized>(row: ArrayView1<'_, f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &pj) in row.iter().enumerate() {
        if pj > 0.0 {
            acc += pj;
            last_positive = j;
            if u < acc {
                return j;
            }
        }
    }
    // u landed in the rounding slack at the top of the CDF
    last_positive
}

/// Total variation distance ½ Σ |a_i - b_i| between two distributions.
pub fn tv_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(0.5 * a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Monte-Carlo estimate of the distribution of (X_{k-1}, X_k) given X_0 = x0.
pub fn empirical_pair_distribution<R: Rng + ?Sized>(
    p: &StochasticMatrix,
    x0: usize,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> PairDistribution {
    assert!(k >= 1, "pair distribution needs at least one step");
    assert!(trials >= 1, "need at least one trial");
    let n = p.n();
    let mut m = Array2::zeros((n, n));
    let w = 1.0 / trials as f64;
    for _ in 0..trials {
        let mut x = x0;
        let mut prev = x0;
        for _ in 0..k {
            prev = x;
            x = sample_next(p, x, rng);
        }
        m[[prev, x]] += w;
    }
    PairDistribution { m }
}

/// Exact distribution of (X_{k-1}, X_k) given X_0 = x0, by matrix powers:
/// mu_k(i, j) = (P^{k-1})_{x0, i} * p_ij.
pub fn exact_pair_distribution(p: &StochasticMatrix, x0: usize, k: usize) -> PairDistribution {
    assert!(k >= 1);
    let n = p.n();
    let mut nu = Array1::zeros(n);
    nu[x0] = 1.0;
    for _ in 0..k - 1 {
        nu = p.matrix().t().dot(&nu);
    }
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = nu[i] * p.get(i, j);
        }
    }
    PairDistribution { m }
}

/// The stationary pair distribution mu(i, j) = q_i p_ij.
pub fn stationary_pair_distribution(p: &StochasticMatrix, q: &ProbVector) -> PairDistribution {
    let n = p.n();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = q.get(i) * p.get(i, j);
        }
    }
    PairDistribution { m }
}

/// True iff max_{i,j} |pi_i p_ij - pi_j p_ji| <= tol.
pub fn check_detailed_balance(p: &StochasticMatrix, pi: &ProbVector, tol: f64) -> bool {
    detailed_balance_defect(p, pi) <= tol
}

/// max_{i,j} |pi_i p_ij - pi_j p_ji|.
pub fn detailed_balance_defect(p: &StochasticMatrix, pi: &ProbVector) -> f64 {
    let n = p.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let d = (pi.get(i) * p.get(i, j) - pi.get(j) * p.get(j, i)).abs();
            worst = worst.max(d);
        }
    }
    worst
}

/// Writes a matrix in the plain-text exchange format: first line `n`,
/// then n rows of n decimals with 17 significant digits.
pub fn write_matrix_text(a: ArrayView2<'_, f64>) -> String {
    let n = a.nrows();
    let mut out = String::new();
    out.push_str(&format!("{n}\n"));
    for row in a.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the matrix text format written by [`write_matrix_text`].
pub fn parse_matrix_text(text: &str) -> Result<Array2<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix text".into()))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad dimension line: {e}")))?;
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {i}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|e| Error::Parse(format!("row {i}: bad number {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {n}",
                vals.len()
            )));
        }
        for (j, v) in vals.into_iter().enumerate() {
            a[[i, j]] = v;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validates_uniform_and_identity() {
        assert!(StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).is_ok());
        assert!(StochasticMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).is_ok());
    }

    #[test]
    fn rejects_bad_row_sum() {
        let err = StochasticMatrix::new(array![[0.6, 0.5], [0.5, 0.5]]).unwrap_err();
        match err {
            Error::RowSumMismatch { row, sum, .. } => {
                assert_eq!(row, 0);
                assert_abs_diff_eq!(sum, 1.1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_entry() {
        let err = StochasticMatrix::new(array![[1.5, -0.5], [0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { row: 0, col: 1, .. }));
    }

    #[test]
    fn ergodicity_two_cycle_is_periodic() {
        let p = StochasticMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = ergodicity_check(&p);
        assert!(e.irreducible && !e.aperiodic);
    }

    #[test]
    fn ergodicity_identity_is_reducible_aperiodic() {
        let p = StochasticMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let e = ergodicity_check(&p);
        assert!(!e.irreducible && e.aperiodic);
    }

    #[test]
    fn ergodicity_uniform_is_ergodic() {
        let p = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let e = ergodicity_check(&p);
        assert!(e.irreducible && e.aperiodic);
    }

    #[test]
    fn ergodicity_three_cycle_has_period_three() {
        let p =
            StochasticMatrix::new(array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
                .unwrap();
        let e = ergodicity_check(&p);
        assert!(e.irreducible && !e.aperiodic);
    }

    #[test]
    fn stationary_two_state_balance() {
        let p = StochasticMatrix::new(array![[0.9, 0.1], [0.5, 0.5]]).unwrap();
        let q = stationary_distribution(&p, 1e-12).unwrap();
        assert_abs_diff_eq!(q.get(0), 5.0 / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(q.get(1), 1.0 / 6.0, epsilon = 1e-13);
    }

    #[test]
    fn stationary_doubly_stochastic_is_uniform() {
        let p = StochasticMatrix::new(array![
            [0.2, 0.3, 0.5],
            [0.5, 0.2, 0.3],
            [0.3, 0.5, 0.2]
        ])
        .unwrap();
        let q = stationary_distribution(&p, 1e-12).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(q.get(i), 1.0 / 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn stationary_rejects_periodic() {
        let p = StochasticMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            stationary_distribution(&p, 1e-12),
            Err(Error::NotErgodic { .. })
        ));
    }

    #[test]
    fn sampling_deterministic_rows() {
        let p = StochasticMatrix::new(array![
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0]
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(sample_next(&p, 0, &mut rng), 0);
            assert_eq!(sample_next(&p, 1, &mut rng), 2);
        }
    }

    #[test]
    fn sampling_frequency_matches_row() {
        let p = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 1_000_000usize;
        let mut zero = 0usize;
        for _ in 0..trials {
            if sample_next(&p, 0, &mut rng) == 0 {
                zero += 1;
            }
        }
        let freq = zero as f64 / trials as f64;
        // 3 sigma band around 0.5 with sigma = sqrt(p(1-p)/N)
        assert!((freq - 0.5).abs() < 3.0 * (0.25f64 / trials as f64).sqrt() + 1e-9);
    }

    #[test]
    fn tv_basics() {
        let a = array![0.7, 0.3];
        let b = array![0.5, 0.5];
        assert_abs_diff_eq!(tv_distance(a.view(), a.view()).unwrap(), 0.0);
        assert_abs_diff_eq!(tv_distance(a.view(), b.view()).unwrap(), 0.2, epsilon = 1e-15);
        let d = array![1.0, 0.0];
        let e = array![0.0, 1.0];
        assert_abs_diff_eq!(tv_distance(d.view(), e.view()).unwrap(), 1.0);
        assert!(tv_distance(a.view(), array![1.0].view()).is_err());
    }

    #[test]
    fn pair_distribution_uniform_chain_mixes_in_one_step() {
        let p = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let q = stationary_distribution(&p, 1e-12).unwrap();
        let exact = exact_pair_distribution(&p, 0, 2);
        let stat = stationary_pair_distribution(&p, &q);
        assert_abs_diff_eq!(exact.tv_distance(&stat).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pair_distribution_single_trial_single_step() {
        let p = StochasticMatrix::new(array![[1.0, 0.0], [0.5, 0.5]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = empirical_pair_distribution(&p, 0, 1, 1, &mut rng);
        assert_abs_diff_eq!(d.matrix()[[0, 0]], 1.0);
    }

    #[test]
    fn empirical_pairs_approach_stationary() {
        let p = StochasticMatrix::new(array![[0.6, 0.4], [0.3, 0.7]]).unwrap();
        let q = stationary_distribution(&p, 1e-12).unwrap();
        let stat = stationary_pair_distribution(&p, &q);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = empirical_pair_distribution(&p, 0, 40, 200_000, &mut rng);
        assert!(d.tv_distance(&stat).unwrap() < 0.01);
    }

    #[test]
    fn detailed_balance_symmetric_true_cycle_false() {
        let sym = StochasticMatrix::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let pi = ProbVector::new(array![0.5, 0.5]).unwrap();
        assert!(check_detailed_balance(&sym, &pi, 1e-12));

        let cyc =
            StochasticMatrix::new(array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
                .unwrap();
        let u = ProbVector::new(array![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(!check_detailed_balance(&cyc, &u, 1e-12));
    }

    #[test]
    fn matrix_text_roundtrip_is_exact() {
        let a = array![
            [0.1234567890123456789, 0.5],
            [1.0 / 3.0, std::f64::consts::PI * 1e-7]
        ];
        let text = write_matrix_text(a.view());
        let back = parse_matrix_text(&text).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn parse_rejects_ragged_text() {
        assert!(parse_matrix_text("2\n1 0\n1").is_err());
        assert!(parse_matrix_text("").is_err());
    }
}
