//! Signed logarithmic representation of reals.
//!
//! A value carries its sign, `ln|v|` and the plain float `v`. While operands and results
//! are normal floats, arithmetic is ordinary IEEE arithmetic on `v`; outside that range it
//! continues in the log domain, so magnitudes such as `2^-1960` or `2^1440` stay exact in
//! `ln|v|` even though `v` itself has under- or overflowed.
//! Arithmetic never panics: domain violations produce a NaN value that callers detect
//! with [`SignedLog::is_nan`].

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub(crate) fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog<T> {
    sign: Sign,
    ln_abs: T,
    /// Plain float value; authoritative whenever it is a normal float (or an exact zero).
    value: T,
}

impl<T: Scalar> SignedLog<T> {
    pub fn zero() -> Self {
        SignedLog {
            sign: Sign::Zero,
            ln_abs: T::neg_infinity(),
            value: T::zero(),
        }
    }

    pub fn one() -> Self {
        SignedLog {
            sign: Sign::Pos,
            ln_abs: T::zero(),
            value: T::one(),
        }
    }

    pub fn nan() -> Self {
        SignedLog {
            sign: Sign::Pos,
            ln_abs: T::nan(),
            value: T::nan(),
        }
    }

    pub fn from_value(v: T) -> Self {
        if v.is_nan() {
            Self::nan()
        } else if v == T::zero() {
            Self::zero()
        } else {
            let sign = if v > T::zero() { Sign::Pos } else { Sign::Neg };
            SignedLog {
                sign,
                ln_abs: v.abs().ln(),
                value: v,
            }
        }
    }

    /// Builds `sign · exp(ln_abs)`. A `-inf` log magnitude is normalized to zero.
    pub fn from_ln(sign: Sign, ln_abs: T) -> Self {
        if ln_abs.is_nan() {
            return Self::nan();
        }
        if sign == Sign::Zero || ln_abs == T::neg_infinity() {
            return Self::zero();
        }
        let mag = ln_abs.exp();
        let value = if sign == Sign::Neg { -mag } else { mag };
        SignedLog {
            sign,
            ln_abs,
            value,
        }
    }

    /// Positive value `exp(ln_abs)`.
    pub fn exp_of(ln_abs: T) -> Self {
        Self::from_ln(Sign::Pos, ln_abs)
    }

    /// Plain float value can stand in for the number exactly.
    fn in_range(&self) -> bool {
        self.sign == Sign::Zero || (self.value.is_normal() && !self.is_nan())
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `ln |v|`; `-inf` for zero.
    pub fn ln_abs(&self) -> T {
        self.ln_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn is_nan(&self) -> bool {
        self.ln_abs.is_nan()
    }

    /// Finite, non-NaN magnitude (zero counts as finite).
    pub fn is_finite(&self) -> bool {
        self.is_zero() || self.ln_abs.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Pos && !self.is_nan()
    }

    /// Plain float value; under/overflows to `0` / `±inf` as the magnitude dictates.
    pub fn to_value(&self) -> T {
        self.value
    }

    pub fn abs(&self) -> Self {
        match self.sign {
            Sign::Neg => SignedLog {
                sign: Sign::Pos,
                value: -self.value,
                ..*self
            },
            _ => *self,
        }
    }

    pub fn recip(&self) -> Self {
        if self.is_nan() || self.is_zero() {
            return Self::nan();
        }
        if self.in_range() {
            let r = T::one() / self.value;
            if r.is_normal() {
                return Self::from_value(r);
            }
        }
        Self::from_ln(self.sign, -self.ln_abs)
    }

    /// Real power `self^exponent`. Negative bases require an integral exponent; `0^e` is
    /// zero for `e > 0`, one for `e = 0` and NaN otherwise.
    pub fn powf(&self, exponent: T) -> Self {
        if self.is_nan() || exponent.is_nan() {
            return Self::nan();
        }
        let integral = exponent.fract() == T::zero();
        if self.sign == Sign::Zero {
            return if exponent > T::zero() {
                Self::zero()
            } else if exponent == T::zero() {
                Self::one()
            } else {
                Self::nan()
            };
        }
        if self.sign == Sign::Neg && !integral {
            return Self::nan();
        }
        if self.in_range() {
            let r = self.value.powf(exponent);
            if r.is_normal() {
                return Self::from_value(r);
            }
        }
        let odd = integral && (exponent / T::lit(2.0)).fract() != T::zero();
        let sign = if self.sign == Sign::Neg && odd {
            Sign::Neg
        } else {
            Sign::Pos
        };
        Self::from_ln(sign, mul_ln(exponent, self.ln_abs))
    }

    /// Natural log of a positive value; NaN for negative input, `-inf` for zero.
    pub fn ln(&self) -> Self {
        match self.sign {
            Sign::Pos => Self::from_value(self.ln_abs),
            Sign::Zero => Self::from_value(T::neg_infinity()),
            Sign::Neg => Self::nan(),
        }
    }

    /// `exp(v)` for a value given in signed-log form.
    pub fn exp(&self) -> Self {
        let v = self.to_value();
        if v.is_nan() {
            Self::nan()
        } else {
            Self::exp_of(v)
        }
    }

    pub fn min(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Greater) => other,
            Some(_) => self,
            None => Self::nan(),
        }
    }

    pub fn max(self, other: Self) -> Self {
        match self.partial_cmp(&other) {
            Some(Ordering::Less) => other,
            Some(_) => self,
            None => Self::nan(),
        }
    }

    fn log_add(self, rhs: Self) -> Self {
        let (big, small) = if self.ln_abs >= rhs.ln_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.ln_abs == T::infinity() {
            if small.ln_abs == T::infinity() && small.sign != big.sign {
                return Self::nan();
            }
            return big;
        }
        let gap = small.ln_abs - big.ln_abs;
        // Below half an ulp the sum rounds to `big`; keep it bit-exact.
        if gap < T::epsilon().ln() - T::one() {
            return big;
        }
        if big.sign == small.sign {
            Self::from_ln(big.sign, big.ln_abs + gap.exp().ln_1p())
        } else if gap == T::zero() {
            Self::zero()
        } else {
            Self::from_ln(big.sign, big.ln_abs + (-gap.exp()).ln_1p())
        }
    }
}

/// `t · ln`, treating `0 · (±inf)` as `0` (so `x^0 = 1` even for extreme `x`).
fn mul_ln<T: Scalar>(t: T, ln: T) -> T {
    if t == T::zero() {
        T::zero()
    } else {
        t * ln
    }
}

impl<T: Scalar> PartialOrd for SignedLog<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_nan() || other.is_nan() {
            return None;
        }
        if self.in_range() && other.in_range() {
            return self.value.partial_cmp(&other.value);
        }
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                Sign::Zero => Some(Ordering::Equal),
                Sign::Pos => self.ln_abs.partial_cmp(&other.ln_abs),
                Sign::Neg => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            ord => Some(ord),
        }
    }
}

impl<T: Scalar> Neg for SignedLog<T> {
    type Output = Self;
    fn neg(self) -> Self {
        SignedLog {
            sign: self.sign.flip(),
            value: -self.value,
            ..self
        }
    }
}

impl<T: Scalar> Add for SignedLog<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_nan() || rhs.is_nan() {
            return Self::nan();
        }
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if self.in_range() && rhs.in_range() {
            let r = self.value + rhs.value;
            if r.is_normal() || r == T::zero() {
                return Self::from_value(r);
            }
        }
        self.log_add(rhs)
    }
}

impl<T: Scalar> Sub for SignedLog<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Mul for SignedLog<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_nan() || rhs.is_nan() {
            return Self::nan();
        }
        if self.is_zero() || rhs.is_zero() {
            if self.ln_abs == T::infinity() || rhs.ln_abs == T::infinity() {
                return Self::nan();
            }
            return Self::zero();
        }
        if self.in_range() && rhs.in_range() {
            let r = self.value * rhs.value;
            if r.is_normal() {
                return Self::from_value(r);
            }
        }
        Self::from_ln(self.sign.times(rhs.sign), self.ln_abs + rhs.ln_abs)
    }
}

impl<T: Scalar> Div for SignedLog<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if self.is_nan() || rhs.is_nan() || rhs.is_zero() {
            return Self::nan();
        }
        if self.is_zero() {
            return Self::zero();
        }
        if self.in_range() && rhs.in_range() {
            let r = self.value / rhs.value;
            if r.is_normal() {
                return Self::from_value(r);
            }
        }
        Self::from_ln(self.sign.times(rhs.sign), self.ln_abs - rhs.ln_abs)
    }
}

/// `a ≤ b` for log magnitudes, tolerant to rounding of order `cmp_tol · (1 + |b|)`.
pub fn log_le<T: Scalar>(a: T, b: T) -> bool {
    if a.is_nan() || b.is_nan() {
        return false;
    }
    if a == T::neg_infinity() || b == T::infinity() {
        return true;
    }
    if b == T::neg_infinity() || a == T::infinity() {
        return false;
    }
    a <= b + T::cmp_tol() * (T::one() + b.abs())
}

/// Strict `a > b` for log magnitudes; values within rounding of each other are ties and fail.
pub fn log_gt<T: Scalar>(a: T, b: T) -> bool {
    if a.is_nan() || b.is_nan() {
        return false;
    }
    if a == T::neg_infinity() || b == T::infinity() {
        return false;
    }
    if b == T::neg_infinity() || a == T::infinity() {
        return true;
    }
    a > b + T::cmp_tol() * (T::one() + b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl(v: f64) -> SignedLog<f64> {
        SignedLog::from_value(v)
    }

    #[test]
    fn roundtrip_plain_values() {
        for v in [-3.5, -1e-300, 0.0, 2.0, 7e200] {
            assert_eq!(sl(v).to_value(), v);
        }
    }

    #[test]
    fn arithmetic_matches_floats() {
        let cases = [
            (1.5, 2.25),
            (-4.0, 3.0),
            (1e-5, -1e-5),
            (0.0, -2.0),
            (5.0, 5.0),
        ];
        for (a, b) in cases {
            let (x, y) = (sl(a), sl(b));
            assert!(((x + y).to_value() - (a + b)).abs() <= 1e-14 * (1.0 + (a + b).abs()));
            assert!(((x - y).to_value() - (a - b)).abs() <= 1e-14 * (1.0 + (a - b).abs()));
            assert!(((x * y).to_value() - a * b).abs() <= 1e-14 * (1.0 + (a * b).abs()));
        }
        assert!((sl(1e-5) + sl(-1e-5)).is_zero());
    }

    #[test]
    fn extreme_magnitudes_stay_finite() {
        let tiny = SignedLog::<f64>::exp_of(-1960.0 * std::f64::consts::LN_2);
        let huge = tiny.recip();
        assert_eq!((tiny * sl(2.0)).ln_abs(), tiny.ln_abs() + 2f64.ln());
        assert!((tiny + tiny).ln_abs() > tiny.ln_abs());
        assert_eq!(tiny.to_value(), 0.0);
        assert_eq!(huge.to_value(), f64::INFINITY);
        assert_eq!((tiny * huge).ln_abs(), 0.0);
        assert!(tiny < sl(1e-300));
    }

    #[test]
    fn powers_and_signs() {
        assert_eq!(sl(-2.0).powf(3.0).to_value().round(), -8.0);
        assert_eq!(sl(-2.0).powf(2.0).to_value().round(), 4.0);
        assert!(sl(-2.0).powf(0.5).is_nan());
        assert!(sl(0.0).powf(2.0).is_zero());
        assert_eq!(sl(0.0).powf(0.0).to_value(), 1.0);
        assert!(sl(0.0).powf(-1.0).is_nan());
        assert!(sl(-1.0).ln().is_nan());
    }

    #[test]
    fn ordering_respects_sign() {
        assert!(sl(-5.0) < sl(-1.0));
        assert!(sl(-1.0) < sl(0.0));
        assert!(sl(0.0) < sl(1e-300));
        assert_eq!(sl(3.0).min(sl(-3.0)).to_value(), -3.0);
        assert!(sl(f64::NAN).partial_cmp(&sl(1.0)).is_none());
    }

    #[test]
    fn tolerant_comparisons() {
        let b = 5.0 * (0.1f64).ln();
        let a = (0.1f64.powi(5)).ln();
        assert!(log_le(a, b) && log_le(b, a));
        assert!(!log_gt(a, b) && !log_gt(b, a));
        assert!(log_le(f64::NEG_INFINITY, f64::NEG_INFINITY));
        assert!(!log_gt(f64::NEG_INFINITY, -1e300));
    }
}
