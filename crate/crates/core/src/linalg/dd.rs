//! Double-double arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 106 bits of significand.
//!
//! Used to re-verify borderline stability classifications so that a
//! candidate counterexample is never manufactured by `f64` rounding.
//! The kernels are the classical error-free transformations (two_sum,
//! fma-based two_prod) in the style of Dekker and Bailey's qd library.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative double-double");
        // one Newton step on x = sqrt(a) starting from the f64 root:
        // x' = x + (a - x^2) / (2x), error drops to O(eps^2)
        let x = self.hi.sqrt();
        let x_dd = Self::from_f64(x);
        let r = (self - x_dd * x_dd).to_f64() / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, r);
        Self { hi, lo }
    }

    pub fn max(self, other: Self) -> Self {
        if self < other {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        // two corrected quotient terms give full double-double accuracy
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Self { hi, lo }
    }
}

impl PartialOrd for DoubleDouble {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_lost_bits() {
        let a = DoubleDouble::from_f64(1.0);
        let tiny = DoubleDouble::from_f64(1e-25);
        let s = a + tiny - a;
        assert_eq!(s.to_f64(), 1e-25);
    }

    #[test]
    fn mul_exact_products() {
        let a = DoubleDouble::from_f64(1.0 + 2f64.powi(-30));
        let b = a * a;
        // (1 + u)^2 = 1 + 2u + u^2; u^2 = 2^-60 is below f64 resolution of b.hi
        let expect_lo = 2f64.powi(-60);
        assert!((b.to_f64() - (1.0 + 2f64.powi(-29))).abs() <= 2.0 * expect_lo);
        assert!((b - DoubleDouble::from_f64(1.0 + 2f64.powi(-29))).to_f64() - expect_lo == 0.0);
    }

    #[test]
    fn div_roundtrip() {
        let a = DoubleDouble::from_f64(std::f64::consts::PI);
        let b = DoubleDouble::from_f64(std::f64::consts::E);
        let q = a / b * b - a;
        assert!(q.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = DoubleDouble::from_f64(2.0);
        let r = a.sqrt();
        let back = r * r - a;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn ordering_uses_both_limbs() {
        let one = DoubleDouble::ONE;
        let bigger = one + DoubleDouble::from_f64(1e-25);
        assert!(one < bigger);
        assert!(bigger.abs() > one);
    }
}
