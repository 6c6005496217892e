//! Coefficient fields.
//!
//! Two instantiations matter: exact rationals (`Rational`) for identities that
//! hold exactly, and double precision (`f64`, `Complex64`) for integrators and
//! finite-difference oracles.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic is exact (no rounding).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_f64(x: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Option<Self>;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// `exp` of a scalar, when it exists in the field.
    fn exp_scalar(&self) -> Option<Self>;
    /// Principal `ln` of a scalar, when it exists in the field.
    fn ln_scalar(&self) -> Option<Self>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) * Self::from_i64(den).inv().expect("zero denominator")
    }

    /// False for infinite or NaN values; exact fields are always finite.
    fn is_finite(&self) -> bool {
        true
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.clone() * i)
    }
}

impl Field for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("non-finite float")
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn exp_scalar(&self) -> Option<Self> {
        Zero::is_zero(self).then(One::one)
    }
    fn ln_scalar(&self) -> Option<Self> {
        One::is_one(self).then(Zero::zero)
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn inv(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn exp_scalar(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn ln_scalar(&self) -> Option<Self> {
        (*self > 0.0).then(|| self.ln())
    }
}

impl Field for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn inv(&self) -> Option<Self> {
        (!Field::is_zero(self)).then(|| Complex64::new(1.0, 0.0) / self)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn exp_scalar(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn ln_scalar(&self) -> Option<Self> {
        // principal branch, cut along the non-positive real axis
        if self.im == 0.0 && self.re <= 0.0 {
            None
        } else {
            Some(self.ln())
        }
    }
}

/// Binomial-style helper: `n!` as a field element.
pub fn factorial<F: Field>(n: u32) -> F {
    (1..=n as i64).fold(F::one(), |acc, k| acc * F::from_i64(k))
}
