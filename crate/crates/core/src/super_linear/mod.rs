//! Grassmann numbers and supermatrices: products, supertrace, Berezinian,
//! and the supertrace of `ln(1 − A)`.
//!
//! Matrix routines are generic over [`SuperScalar`], so the same code runs on
//! Grassmann-number entries and on jet entries.

mod grassmann;
pub mod json;
mod matrix;

pub use grassmann::{GrassmannNumber, DEFAULT_GENERATORS};
pub use matrix::{even_det, even_inverse, spectral_radius, SuperMatrix};

use crate::error::Result;
use crate::field::Field;
use crate::jet::Jet;

/// Supercommutative ring elements that can serve as supermatrix entries.
pub trait SuperScalar: Clone + PartialEq + std::fmt::Debug {
    type Coeff: Field;

    fn zero_like(&self) -> Self;
    fn from_coeff_like(&self, c: Self::Coeff) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Self::Coeff) -> Self;
    fn is_zero(&self) -> bool;
    /// `Some(parity)` when homogeneous.
    fn parity(&self) -> Option<bool>;
    /// The scalar part: body of a Grassmann number, constant term of a jet.
    fn body(&self) -> Self::Coeff;
    fn inverse(&self) -> Result<Self>;
    fn exp(&self) -> Result<Self>;
    fn ln(&self) -> Result<Self>;

    fn one_like(&self) -> Self {
        self.from_coeff_like(Self::Coeff::one())
    }
}

impl<F: Field> SuperScalar for GrassmannNumber<F> {
    type Coeff = F;

    fn zero_like(&self) -> Self {
        GrassmannNumber::zero(self.generators())
    }
    fn from_coeff_like(&self, c: F) -> Self {
        GrassmannNumber::scalar(self.generators(), c)
    }
    fn add(&self, other: &Self) -> Self {
        GrassmannNumber::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        GrassmannNumber::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        GrassmannNumber::mul(self, other)
    }
    fn neg(&self) -> Self {
        GrassmannNumber::neg(self)
    }
    fn scale(&self, c: &F) -> Self {
        GrassmannNumber::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        GrassmannNumber::is_zero(self)
    }
    fn parity(&self) -> Option<bool> {
        GrassmannNumber::parity(self)
    }
    fn body(&self) -> F {
        GrassmannNumber::body(self)
    }
    fn inverse(&self) -> Result<Self> {
        GrassmannNumber::inverse(self)
    }
    fn exp(&self) -> Result<Self> {
        GrassmannNumber::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        GrassmannNumber::ln(self)
    }
}

impl<F: Field> SuperScalar for Jet<F> {
    type Coeff = F;

    fn zero_like(&self) -> Self {
        Jet::zero(self.space())
    }
    fn from_coeff_like(&self, c: F) -> Self {
        Jet::constant(self.space(), c)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &F) -> Self {
        Jet::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        Jet::is_zero(self)
    }
    fn parity(&self) -> Option<bool> {
        Jet::parity(self)
    }
    fn body(&self) -> F {
        self.constant_term()
    }
    fn inverse(&self) -> Result<Self> {
        Jet::inverse(self)
    }
    fn exp(&self) -> Result<Self> {
        Jet::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        Jet::log(self)
    }
}

#[cfg(test)]
mod tests;
