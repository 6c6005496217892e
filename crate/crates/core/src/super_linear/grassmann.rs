use std::collections::BTreeMap;
use std::fmt;

use crate::error::{bail, Result};
use crate::field::Field;

/// Default number of anticommuting generators.
pub const DEFAULT_GENERATORS: u8 = 4;

/// Element of the exterior algebra on `G` generators with coefficients in `F`.
///
/// Terms are keyed by the bitmask of generators, multiplied in increasing
/// generator order.
#[derive(Clone, PartialEq)]
pub struct GrassmannNumber<F> {
    generators: u8,
    terms: BTreeMap<u32, F>,
}

fn sign_of_product(a: u32, b: u32) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

impl<F: Field> GrassmannNumber<F> {
    pub fn zero(generators: u8) -> Self {
        assert!(generators <= 31, "at most 31 generators");
        GrassmannNumber { generators, terms: BTreeMap::new() }
    }

    pub fn scalar(generators: u8, c: F) -> Self {
        let mut g = Self::zero(generators);
        if !c.is_zero() {
            g.terms.insert(0, c);
        }
        g
    }

    pub fn one(generators: u8) -> Self {
        Self::scalar(generators, F::one())
    }

    /// The `i`-th generator `θᵢ` (0-based).
    pub fn generator(generators: u8, i: u8) -> Self {
        assert!(i < generators, "generator index out of range");
        let mut g = Self::zero(generators);
        g.terms.insert(1 << i, F::one());
        g
    }

    /// `c·θ_{i₁}⋯θ_{iₖ}` for the generators in `mask`, in increasing order.
    pub fn term(generators: u8, mask: u32, c: F) -> Self {
        let mut g = Self::zero(generators);
        if !c.is_zero() && mask < (1u32 << generators) {
            g.terms.insert(mask, c);
        }
        g
    }

    pub fn generators(&self) -> u8 {
        self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &F)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, mask: u32) -> F {
        self.terms.get(&mask).cloned().unwrap_or_else(F::zero)
    }

    pub fn body(&self) -> F {
        self.coeff(0)
    }

    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&0);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(parity)` when homogeneous; `None` for mixed elements.
    pub fn parity(&self) -> Option<bool> {
        let mut it = self.terms.keys().map(|m| m.count_ones() % 2 == 1);
        match it.next() {
            None => Some(false),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    pub fn is_mixed(&self) -> bool {
        self.parity().is_none()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.generators, other.generators, "Grassmann numbers over different generator counts");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let s = out.coeff(*m) + c.clone();
            if s.is_zero() {
                out.terms.remove(m);
            } else {
                out.terms.insert(*m, s);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-F::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::zero(self.generators);
        for (m, v) in &self.terms {
            let p = v.clone() * c.clone();
            if !p.is_zero() {
                out.terms.insert(*m, p);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = Self::zero(self.generators);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let Some(neg) = sign_of_product(*a, *b) else { continue };
                let p = ca.clone() * cb.clone();
                let p = if neg { -p } else { p };
                let s = out.coeff(a | b) + p;
                if s.is_zero() {
                    out.terms.remove(&(a | b));
                } else {
                    out.terms.insert(a | b, s);
                }
            }
        }
        out
    }

    fn soul_series(soul: &Self, coeff: impl Fn(u32) -> F) -> Self {
        let mut acc = Self::scalar(soul.generators, coeff(0));
        let mut power = Self::one(soul.generators);
        for k in 1..=u32::from(soul.generators) {
            power = power.mul(soul);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power.scale(&coeff(k)));
        }
        acc
    }

    /// Inverse via body inverse and the terminating geometric series on the soul.
    pub fn inverse(&self) -> Result<Self> {
        let Some(b) = self.body().inv() else { bail!(Singular, "Grassmann number with zero body") };
        let n = self.soul().scale(&b).neg();
        Ok(Self::soul_series(&n, |_| F::one()).scale(&b))
    }

    pub fn exp(&self) -> Result<Self> {
        let Some(e) = self.body().exp_scalar() else { bail!(Domain, "exp of body {} not in the field", self.body()) };
        let mut fact = F::one();
        let mut facts = vec![F::one()];
        for k in 1..=i64::from(self.generators) {
            fact = fact * F::from_i64(k);
            facts.push(fact.clone());
        }
        Ok(Self::soul_series(&self.soul(), |k| facts[k as usize].inv().unwrap()).scale(&e))
    }

    /// Principal logarithm: `ln(body) + ln(1 + soul/body)`.
    pub fn ln(&self) -> Result<Self> {
        let b = self.body();
        let Some(lb) = b.ln_scalar() else { bail!(Domain, "ln of body {b} not defined in the field") };
        let n = self.soul().scale(&b.inv().unwrap());
        let series = Self::soul_series(&n, |k| match k {
            0 => F::zero(),
            k => F::from_ratio(if k % 2 == 1 { 1 } else { -1 }, i64::from(k)),
        });
        Ok(series.add(&Self::scalar(self.generators, lb)))
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> GrassmannNumber<G> {
        let mut out = GrassmannNumber::zero(self.generators);
        for (m, c) in &self.terms {
            let g = f(c);
            if !g.is_zero() {
                out.terms.insert(*m, g);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

impl<F: Field> fmt::Display for GrassmannNumber<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let gens: Vec<String> = (0..32).filter(|i| m >> i & 1 == 1).map(|i| format!("θ{}", i + 1)).collect();
                if gens.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", gens.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<F: Field> fmt::Debug for GrassmannNumber<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ{}[{}]", self.generators, self)
    }
}
