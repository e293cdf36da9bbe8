//! LU factorization with partial pivoting for small dense `f64` matrices.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Lu {
    lu: Array2<f64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn factor(a: ArrayView2<'_, f64>) -> Result<Self> {
        let (rows, cols) = a.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let n = rows;
        let mut lu = a.to_owned();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;

        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[[k, k]].abs();
            for i in k + 1..n {
                let v = lu[[i, k]].abs();
                if v > best {
                    best = v;
                    pivot = i;
                }
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap([k, j], [pivot, j]);
                }
                perm.swap(k, pivot);
                sign = -sign;
            }
            let d = lu[[k, k]];
            if d == 0.0 {
                singular = true;
                continue;
            }
            for i in k + 1..n {
                let f = lu[[i, k]] / d;
                lu[[i, k]] = f;
                for j in k + 1..n {
                    lu[[i, j]] -= f * lu[[k, j]];
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            sign,
            singular,
        })
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for k in 0..self.lu.nrows() {
            d *= self.lu[[k, k]];
        }
        d
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let n = self.lu.nrows();
        if b.len() != n {
            return Err(Error::LengthMismatch {
                left: b.len(),
                right: n,
            });
        }
        if self.singular {
            return Err(Error::InvalidInput("singular matrix in solve".into()));
        }
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[[i, j]] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[[i, j]] * x[j];
            }
            x[i] /= self.lu[[i, i]];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn sample() -> Array2<f64> {
        array![
            [0.740498, -0.426366, 0.206296, 0.555068, 0.432149, 0.83076],
            [0.720787, 0.836475, -0.946825, -0.125504, -0.030111, -0.869692],
            [-0.988748, 0.661243, 0.966604, 0.56922, -0.368793, 0.410667],
            [-0.401638, 0.481497, -0.440506, 0.565182, 0.975481, 0.972477],
            [0.765725, 0.82562, 0.416414, 0.108994, 0.846476, -0.820538],
            [-0.259737, 0.211878, -0.04454, 0.585716, -0.609827, -0.875493],
        ]
    }

    #[test]
    fn det_matches_reference() {
        let lu = Lu::factor(sample().view()).unwrap();
        assert_abs_diff_eq!(lu.det(), -4.432979825851308, epsilon = 1e-12);
    }

    #[test]
    fn solve_matches_reference() {
        let lu = Lu::factor(sample().view()).unwrap();
        let b = array![-0.746963, 0.925563, -0.734451, -0.547803, -0.245887, 0.246843];
        let x = lu.solve(b.view()).unwrap();
        let expect = [
            1.68929117257224960e-2,
            8.53336722017763449e-2,
            -5.64861195989396214e-1,
            -4.12105856188391018e-1,
            -3.31661382897250723e-1,
            -2.82255136545839003e-1,
        ];
        for (got, want) in x.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-13);
        }
    }

    #[test]
    fn singular_is_detected() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        let lu = Lu::factor(a.view()).unwrap();
        assert!(lu.is_singular());
        assert_eq!(lu.det(), 0.0);
        assert!(lu.solve(array![1.0, 1.0].view()).is_err());
    }
}
