//! Signed numbers stored as `(sign, ln|x|)`.
//!
//! Bound constants such as `exp(12d + 8)` or `(4α)^{K+2}·exp(44dL/c)` leave
//! the `f64` range quickly; all of them are carried through this type and
//! only converted to plain reals at report time.

use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScalar<T> {
    sign: Sign,
    log_magnitude: T,
}

impl<T: Real> LogScalar<T> {
    pub fn zero() -> Self {
        Self { sign: Sign::Zero, log_magnitude: T::neg_infinity() }
    }

    pub fn one() -> Self {
        Self { sign: Sign::Positive, log_magnitude: T::zero() }
    }

    /// The positive number `e^{log_magnitude}`.
    pub fn from_ln(log_magnitude: T) -> Self {
        if log_magnitude == T::neg_infinity() {
            return Self::zero();
        }
        Self { sign: Sign::Positive, log_magnitude }
    }

    pub fn from_real(v: T) -> Self {
        if v == T::zero() {
            Self::zero()
        } else if v > T::zero() {
            Self { sign: Sign::Positive, log_magnitude: v.ln() }
        } else {
            Self { sign: Sign::Negative, log_magnitude: (-v).ln() }
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `ln|x|`; `-inf` for zero.
    pub fn ln_abs(&self) -> T {
        self.log_magnitude
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Plain value; may be `±inf` or `0` if outside the representable range.
    /// The round trip through `ln` costs about `|ln x|` ulps.
    pub fn to_real(&self) -> T {
        match self.sign {
            Sign::Zero => T::zero(),
            Sign::Positive => self.log_magnitude.exp(),
            Sign::Negative => -self.log_magnitude.exp(),
        }
    }

    /// Plain value clamped to the finite range; the flag reports clamping.
    pub fn to_real_clamped(&self) -> (T, bool) {
        let v = self.to_real();
        if v.is_infinite() {
            let m = T::max_value();
            (if v > T::zero() { m } else { -m }, true)
        } else {
            (v, false)
        }
    }

    /// `|x|^p` for real `p`. Zero stays zero for `p > 0`.
    pub fn powf(&self, p: T) -> Self {
        match self.sign {
            Sign::Zero => {
                if p == T::zero() {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            _ => Self::from_ln(self.log_magnitude * p),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        let mut out = self.powf(T::lit(n as f64));
        if self.sign == Sign::Negative && n % 2 != 0 {
            out.sign = Sign::Negative;
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }

    pub fn recip(&self) -> Self {
        Self { sign: self.sign, log_magnitude: -self.log_magnitude }
    }

    pub fn abs(&self) -> Self {
        match self.sign {
            Sign::Zero => *self,
            _ => Self { sign: Sign::Positive, log_magnitude: self.log_magnitude },
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn scale(self, factor: T) -> Self {
        self * Self::from_real(factor)
    }
}

impl<T: Real> Default for LogScalar<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> PartialOrd for LogScalar<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        fn rank(s: Sign) -> i8 {
            match s {
                Sign::Negative => -1,
                Sign::Zero => 0,
                Sign::Positive => 1,
            }
        }
        match rank(self.sign).cmp(&rank(other.sign)) {
            Ordering::Equal => match self.sign {
                Sign::Zero => Some(Ordering::Equal),
                Sign::Positive => self.log_magnitude.partial_cmp(&other.log_magnitude),
                Sign::Negative => other.log_magnitude.partial_cmp(&self.log_magnitude),
            },
            o => Some(o),
        }
    }
}

impl<T: Real> Neg for LogScalar<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let sign = match self.sign {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        };
        Self { sign, log_magnitude: self.log_magnitude }
    }
}

impl<T: Real> Add for LogScalar<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log_magnitude >= rhs.log_magnitude { (self, rhs) } else { (rhs, self) };
        let diff = lo.log_magnitude - hi.log_magnitude;
        if hi.sign == lo.sign {
            Self { sign: hi.sign, log_magnitude: hi.log_magnitude + diff.exp().ln_1p() }
        } else {
            if diff == T::zero() {
                return Self::zero();
            }
            // ln(1 - e^{diff}) with diff < 0
            Self { sign: hi.sign, log_magnitude: hi.log_magnitude + (-diff.exp_m1()).ln() }
        }
    }
}

impl<T: Real> Sub for LogScalar<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Mul for LogScalar<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let sign = if self.sign == rhs.sign { Sign::Positive } else { Sign::Negative };
        Self { sign, log_magnitude: self.log_magnitude + rhs.log_magnitude }
    }
}

impl<T: Real> Div for LogScalar<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real> std::iter::Sum for LogScalar<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type L = LogScalar<f64>;

    #[test]
    fn round_trip() {
        for &v in &[1e-300, -3.5, 0.0, 2.0, 1e299] {
            let back = L::from_real(v).to_real();
            assert!((back - v).abs() <= 1e-13 * v.abs(), "{v} -> {back}");
        }
    }

    #[test]
    fn beyond_double_range() {
        let big = L::from_ln(1000.0);
        let sum = big + big;
        assert!((sum.ln_abs() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(sum.to_real().is_infinite());
        let (v, clamped) = sum.to_real_clamped();
        assert!(clamped && v == f64::MAX);
        assert!(((big / big).to_real() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cancellation_and_signs() {
        let a = L::from_real(3.0);
        assert!((a - a).is_zero());
        assert!(((a - L::from_real(5.0)).to_real() + 2.0).abs() < 1e-14);
        assert!(((L::from_real(-2.0) * L::from_real(-4.0)).to_real() - 8.0).abs() < 1e-14);
        assert!(L::from_real(-1.0) < L::zero() && L::zero() < L::from_real(1e-200));
        assert!(L::from_real(-1.0) > L::from_real(-2.0));
    }

    proptest! {
        #[test]
        fn matches_direct_arithmetic(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
            let la = L::from_ln(a);
            let lb = L::from_ln(b);
            let lc = L::from_ln(c);
            let direct = (a.exp() + b.exp()) * c.exp();
            let via = ((la + lb) * lc).ln_abs();
            prop_assert!((via - direct.ln()).abs() <= 1e-12 * direct.ln().abs().max(1.0));
        }
    }
}
