use crate::error::{bail, Result};
use crate::field::Field;

use super::algebra::Jet;

impl<F: Field> Jet<F> {
    /// Sum `Σ coeff(k)·nᵏ` for a jet `n` without constant term; terminates
    /// because powers of `n` eventually exceed every truncation bound.
    fn nilpotent_series(n: &Jet<F>, mut coeff: impl FnMut(u32) -> F) -> Jet<F> {
        let mut acc = Jet::constant(n.space(), coeff(0));
        let mut power = Jet::one(n.space());
        let mut k = 0;
        loop {
            k += 1;
            power = &power * n;
            if power.is_zero() {
                return acc;
            }
            acc = &acc + &power.scale(&coeff(k));
        }
    }

    /// Exponential; the constant term must have an exponential in `F`.
    pub fn exp(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let Some(e0) = c0.exp_scalar() else {
            bail!(Domain, "exp of constant term {c0} is not in the coefficient field");
        };
        let n = self - &Jet::constant(self.space(), c0);
        let mut fact = vec![F::one()];
        let series = Self::nilpotent_series(&n, |k| {
            while fact.len() <= k as usize {
                let m = fact.len() as i64;
                let last = fact.last().unwrap().clone();
                fact.push(last * F::from_i64(m));
            }
            fact[k as usize].inv().unwrap()
        });
        Ok(series.scale(&e0))
    }

    /// Logarithm of a jet with constant term exactly 1.
    pub fn log(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            bail!(Domain, "log needs constant term 1, got {c0}");
        }
        Ok(Self::log_one_plus(&(self - &Jet::one(self.space()))))
    }

    /// `ln(1 + n)` for `n` without constant term.
    fn log_one_plus(n: &Self) -> Self {
        Self::nilpotent_series(n, |k| {
            if k == 0 {
                F::zero()
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                F::from_ratio(s, i64::from(k))
            }
        })
    }

    /// Principal logarithm: `ln c₀ + log(a/c₀)` for a constant term `c₀`
    /// whose logarithm exists in the field.
    pub fn log_principal(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let Some(l0) = c0.ln_scalar() else { bail!(Domain, "ln of constant term {c0} is not defined in the coefficient field") };
        // (a − c₀)/c₀ has no constant term even when c₀·c₀⁻¹ rounds away from 1
        let n = (self - &Jet::constant(self.space(), c0.clone())).scale(&c0.inv().unwrap());
        Ok(&Self::log_one_plus(&n) + &Jet::constant(self.space(), l0))
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let Some(i0) = c0.inv() else { bail!(Singular, "jet with zero constant term is not invertible") };
        // a = c0(1 + n)  =>  a⁻¹ = c0⁻¹ Σ (−n)^k
        let n = &self.scale(&i0) - &Jet::one(self.space());
        let minus_n = -&n;
        Ok(Self::nilpotent_series(&minus_n, |_| F::one()).scale(&i0))
    }

    /// `(1 + n)^α` for rational `α = num/den`; constant term must be 1.
    pub fn powr(&self, num: i64, den: i64) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            bail!(Domain, "fractional power needs constant term 1, got {c0}");
        }
        let n = self - &Jet::one(self.space());
        let alpha = F::from_ratio(num, den);
        let mut coeffs = vec![F::one()];
        Ok(Self::nilpotent_series(&n, |k| {
            while coeffs.len() <= k as usize {
                let m = coeffs.len() as i64;
                let prev = coeffs.last().unwrap().clone();
                coeffs.push(prev * (alpha.clone() - F::from_i64(m - 1)) * F::from_ratio(1, m));
            }
            coeffs[k as usize].clone()
        }))
    }
}
