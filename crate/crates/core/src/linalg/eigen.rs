//! Eigenvalues of small dense real matrices: balancing, Householder
//! reduction to upper Hessenberg form, then implicitly shifted QR with
//! Francis double shifts and 2x2 real-block extraction.
//!
//! The reduction and QR sweep follow the classical EISPACK/Handbook
//! procedures (balanc, orthes, hqr), eigenvalues only. Everything is
//! generic over [`Scalar`] so the same code runs in `f64` and in
//! double-double precision for borderline re-checks.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::dd::DoubleDouble;

/// Minimal arithmetic surface needed by the eigenvalue iteration.
pub trait Scalar:
    Copy
    + PartialOrd
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    /// Unit roundoff used in deflation tests.
    fn epsilon() -> Self;
    /// QR sweeps allowed per eigenvalue before giving up.
    fn max_qr_iterations() -> usize;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn max_qr_iterations() -> usize {
        30
    }
}

impl Scalar for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::ZERO
    }
    fn one() -> Self {
        DoubleDouble::ONE
    }
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn epsilon() -> Self {
        // 2^-104
        DoubleDouble::from_f64(4.930380657631324e-32)
    }
    fn max_qr_iterations() -> usize {
        // twice the significand means roughly twice the sweeps to deflate
        100
    }
}

#[inline]
fn sign_of<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Diagonal similarity scaling with powers of two (exact in binary
/// floating point), reducing the norm imbalance between rows and columns.
fn balance<T: Scalar>(a: &mut Array2<T>) {
    let n = a.nrows();
    let radix = T::from_f64(2.0);
    let sqrdx = radix * radix;
    loop {
        let mut last = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c = c + a[[j, i]].abs();
                    r = r + a[[i, j]].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                let mut c = c;
                while c < g {
                    f = f * radix;
                    c = c * sqrdx;
                }
                g = r * radix;
                while c > g {
                    f = f / radix;
                    c = c / sqrdx;
                }
                if (c + r) / f < T::from_f64(0.95) * s {
                    last = false;
                    let g = T::one() / f;
                    for j in 0..n {
                        a[[i, j]] = a[[i, j]] * g;
                    }
                    for j in 0..n {
                        a[[j, i]] = a[[j, i]] * f;
                    }
                }
            }
        }
        if last {
            break;
        }
    }
}

/// Householder similarity reduction to upper Hessenberg form, in place.
fn hessenberg<T: Scalar>(a: &mut Array2<T>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![T::zero(); n];
    for m in 1..high {
        let mut scale = T::zero();
        for i in m..n {
            scale = scale + a[[i, m - 1]].abs();
        }
        if scale == T::zero() {
            continue;
        }
        let mut h = T::zero();
        for i in (m..n).rev() {
            ort[i] = a[[i, m - 1]] / scale;
            h = h + ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        h = h - ort[m] * g;
        ort[m] = ort[m] - g;

        // (I - u u^T / h) A from the left
        for j in m..n {
            let mut f = T::zero();
            for i in (m..n).rev() {
                f = f + ort[i] * a[[i, j]];
            }
            f = f / h;
            for i in m..n {
                a[[i, j]] = a[[i, j]] - f * ort[i];
            }
        }
        // A (I - u u^T / h) from the right
        for i in 0..n {
            let mut f = T::zero();
            for j in (m..n).rev() {
                f = f + ort[j] * a[[i, j]];
            }
            f = f / h;
            for j in m..n {
                a[[i, j]] = a[[i, j]] - f * ort[j];
            }
        }
        a[[m, m - 1]] = scale * g;
        for i in m + 1..n {
            a[[i, m - 1]] = T::zero();
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the shifted QR iteration,
/// returned as (re, im) pairs in deflation order. The matrix is destroyed.
fn hqr<T: Scalar>(a: &mut Array2<T>) -> Result<Vec<(T, T)>> {
    let n = a.nrows();
    let mut wr = vec![T::zero(); n];
    let mut wi = vec![T::zero(); n];
    if n == 0 {
        return Ok(Vec::new());
    }
    let eps = T::epsilon();
    let mut anorm = T::zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm = anorm + a[[i, j]].abs();
        }
    }
    let mut t = T::zero();
    let mut nn = n as isize - 1;
    'deflate: while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nnu = nn as usize;
            // find the start l of the active block
            let mut l = 0usize;
            for ll in (1..=nnu).rev() {
                let mut s = a[[ll - 1, ll - 1]].abs() + a[[ll, ll]].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[[ll, ll - 1]].abs() <= eps * s {
                    a[[ll, ll - 1]] = T::zero();
                    l = ll;
                    break;
                }
            }
            let mut x = a[[nnu, nnu]];
            if l == nnu {
                // one real eigenvalue
                wr[nnu] = x + t;
                wi[nnu] = T::zero();
                nn -= 1;
                continue 'deflate;
            }
            let mut y = a[[nnu - 1, nnu - 1]];
            let mut w = a[[nnu, nnu - 1]] * a[[nnu - 1, nnu]];
            if l == nnu - 1 {
                // 2x2 block: real pair or complex conjugate pair
                let p = T::from_f64(0.5) * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= T::zero() {
                    let z = p + sign_of(z, p);
                    wr[nnu - 1] = x + z;
                    wr[nnu] = x + z;
                    if z != T::zero() {
                        wr[nnu] = x - w / z;
                    }
                    wi[nnu - 1] = T::zero();
                    wi[nnu] = T::zero();
                } else {
                    wr[nnu - 1] = x + p;
                    wr[nnu] = x + p;
                    wi[nnu] = z;
                    wi[nnu - 1] = -z;
                }
                nn -= 2;
                continue 'deflate;
            }
            if its == T::max_qr_iterations() {
                return Err(Error::EigenNoConvergence);
            }
            if its != 0 && its % 10 == 0 {
                // exceptional shift
                t = t + x;
                for i in 0..=nnu {
                    a[[i, i]] = a[[i, i]] - x;
                }
                let s = a[[nnu, nnu - 1]].abs() + a[[nnu - 1, nnu - 2]].abs();
                x = T::from_f64(0.75) * s;
                y = x;
                w = T::from_f64(-0.4375) * s * s;
            }
            its += 1;
            // look for two consecutive small subdiagonals
            let mut m = l;
            let mut p = T::zero();
            let mut q = T::zero();
            let mut r = T::zero();
            let mut mm = nnu - 2;
            loop {
                let z = a[[mm, mm]];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[[mm + 1, mm]] + a[[mm, mm + 1]];
                q = a[[mm + 1, mm + 1]] - z - rr - ss;
                r = a[[mm + 2, mm + 1]];
                let s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if mm == l {
                    m = mm;
                    break;
                }
                let u = a[[mm, mm - 1]].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[[mm - 1, mm - 1]].abs() + z.abs() + a[[mm + 1, mm + 1]].abs());
                if u <= eps * v {
                    m = mm;
                    break;
                }
                mm -= 1;
            }
            for i in m + 2..=nnu {
                a[[i, i - 2]] = T::zero();
                if i != m + 2 {
                    a[[i, i - 3]] = T::zero();
                }
            }
            // double QR sweep on rows/columns l..=nnu
            for k in m..nnu {
                if k != m {
                    p = a[[k, k - 1]];
                    q = a[[k + 1, k - 1]];
                    r = if k != nnu - 1 {
                        a[[k + 2, k - 1]]
                    } else {
                        T::zero()
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p = p / x;
                        q = q / x;
                        r = r / x;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s == T::zero() {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[[k, k - 1]] = -a[[k, k - 1]];
                    }
                } else {
                    a[[k, k - 1]] = -s * x;
                }
                p = p + s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q = q / p;
                r = r / p;
                for j in k..=nnu {
                    let mut f = a[[k, j]] + q * a[[k + 1, j]];
                    if k != nnu - 1 {
                        f = f + r * a[[k + 2, j]];
                        a[[k + 2, j]] = a[[k + 2, j]] - f * z;
                    }
                    a[[k + 1, j]] = a[[k + 1, j]] - f * y;
                    a[[k, j]] = a[[k, j]] - f * x;
                }
                let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                for i in l..=mmin {
                    let mut f = x * a[[i, k]] + y * a[[i, k + 1]];
                    if k != nnu - 1 {
                        f = f + z * a[[i, k + 2]];
                        a[[i, k + 2]] = a[[i, k + 2]] - f * r;
                    }
                    a[[i, k + 1]] = a[[i, k + 1]] - f * q;
                    a[[i, k]] = a[[i, k]] - f;
                }
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

/// All eigenvalues of a square real matrix as (re, im) pairs.
pub fn eigenvalues<T: Scalar>(a: &Array2<T>) -> Result<Vec<(T, T)>> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let mut work = a.clone();
    balance(&mut work);
    hessenberg(&mut work);
    hqr(&mut work)
}

/// Largest real part over the spectrum.
pub fn max_real_part<T: Scalar>(a: &Array2<T>) -> Result<T> {
    let ev = eigenvalues(a)?;
    let mut best = T::from_f64(f64::NEG_INFINITY);
    for (re, _) in ev {
        if re > best {
            best = re;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu::Lu;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn sorted(ev: &mut Vec<(f64, f64)>) {
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    #[test]
    fn triangular_spectrum_is_diagonal() {
        let a = array![[-1.0, 5.0, 2.0], [0.0, -2.0, 7.0], [0.0, 0.0, 3.0]];
        let mut ev = eigenvalues(&a).unwrap();
        sorted(&mut ev);
        assert_eq!(ev, vec![(-2.0, 0.0), (-1.0, 0.0), (3.0, 0.0)]);
        assert_abs_diff_eq!(max_real_part(&a).unwrap(), 3.0);
    }

    #[test]
    fn rotation_generator_is_marginal() {
        let a = array![[0.0, -1.0], [1.0, 0.0]];
        let mut ev = eigenvalues(&a).unwrap();
        sorted(&mut ev);
        assert_abs_diff_eq!(ev[0].0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[0].1, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1].1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(max_real_part(&a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dense_6x6_matches_reference() {
        // reference spectrum from an independent solver
        let a = array![
            [0.740498, -0.426366, 0.206296, 0.555068, 0.432149, 0.83076],
            [0.720787, 0.836475, -0.946825, -0.125504, -0.030111, -0.869692],
            [-0.988748, 0.661243, 0.966604, 0.56922, -0.368793, 0.410667],
            [-0.401638, 0.481497, -0.440506, 0.565182, 0.975481, 0.972477],
            [0.765725, 0.82562, 0.416414, 0.108994, 0.846476, -0.820538],
            [-0.259737, 0.211878, -0.04454, 0.585716, -0.609827, -0.875493],
        ];
        let mut ev = eigenvalues(&a).unwrap();
        sorted(&mut ev);
        let expect = [
            (-1.42842268428206776, 0.0),
            (0.494156724886281318, -0.627082662123838341),
            (0.494156724886281318, 0.627082662123838341),
            (0.870665604359762924, -1.40692182465976012),
            (0.870665604359762924, 1.40692182465976012),
            (1.77852002578997670, 0.0),
        ];
        for ((re, im), (er, ei)) in ev.iter().zip(expect) {
            assert_abs_diff_eq!(*re, er, epsilon = 1e-12);
            assert_abs_diff_eq!(*im, ei, epsilon = 1e-12);
        }
    }

    #[test]
    fn double_double_refines_f64_spectrum() {
        let a = array![
            [0.5f64, 0.5, 0.0],
            [0.25, 0.25, 0.5],
            [0.125, 0.5, 0.375]
        ];
        let add = a.mapv(DoubleDouble::from_f64);
        let ev64 = eigenvalues(&a).unwrap();
        let evdd = eigenvalues(&add).unwrap();
        let mut re64: Vec<f64> = ev64.iter().map(|e| e.0).collect();
        let mut redd: Vec<f64> = evdd.iter().map(|e| e.0.to_f64()).collect();
        re64.sort_by(|a, b| a.partial_cmp(b).unwrap());
        redd.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in re64.iter().zip(&redd) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn trace_and_det_are_recovered(vals in proptest::collection::vec(-10.0f64..10.0, 16)) {
            let a = Array2::from_shape_vec((4, 4), vals).unwrap();
            let ev = eigenvalues(&a).unwrap();
            let trace: f64 = (0..4).map(|i| a[[i, i]]).sum();
            let ev_sum: f64 = ev.iter().map(|e| e.0).sum();
            // eigenvalue sum = trace
            prop_assert!((ev_sum - trace).abs() <= 1e-9 * (1.0 + trace.abs()));
            // eigenvalue product = det (complex product is real for real matrices)
            let (mut re, mut im) = (1.0f64, 0.0f64);
            for (er, ei) in &ev {
                let (nr, ni) = (re * er - im * ei, re * ei + im * er);
                re = nr;
                im = ni;
            }
            let det = Lu::factor(a.view()).unwrap().det();
            let scale = a.iter().map(|x| x.abs()).fold(1.0, f64::max).powi(4);
            prop_assert!((re - det).abs() <= 1e-9 * scale);
            prop_assert!(im.abs() <= 1e-9 * scale);
        }
    }
}
