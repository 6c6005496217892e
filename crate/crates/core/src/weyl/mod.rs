//! The (super) Weyl algebra generated by `x̂ᵃ`, `p̂_a` and `ħ` with
//! `[p̂_a, x̂ᵇ] = (ħ/i)δ_aᵇ`, kept in normal order (every `x̂` left of every
//! `p̂`). Powers of `hbar` count factors `ħ/i`.
//!
//! Classical Poisson bracket: `{f, g} = f∂⃖/∂p_a ∂g/∂xᵃ − (−1)^ã f∂⃖/∂xᵃ ∂g/∂p_a`,
//! so that `{p, x} = 1` and the principal symbol of the quantum bracket
//! `{f̂, ĝ}_ħ = (i/ħ)[f̂, ĝ]` is the classical bracket of the symbols.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::json::{scalar_from_json, scalar_to_json, JsonCoeff};
use crate::jet::{Block, Jet, JetSpace, Side, Var};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Mono {
    x: Vec<u16>,
    p: Vec<u16>,
    h: u32,
}

impl Mono {
    fn degree(&self) -> u32 {
        self.x.iter().chain(&self.p).map(|&e| u32::from(e)).sum()
    }
}

/// Element of the Weyl algebra on `n` canonical pairs; pair `a` has parity
/// `parities[a]` for both `x̂ᵃ` and `p̂_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement<F: Field> {
    parities: Vec<bool>,
    terms: BTreeMap<Mono, F>,
}

fn sign<F: Field>(odd: bool) -> F {
    if odd {
        -F::one()
    } else {
        F::one()
    }
}

impl<F: Field> WeylElement<F> {
    pub fn zero(parities: &[bool]) -> Self {
        WeylElement { parities: parities.to_vec(), terms: BTreeMap::new() }
    }

    pub fn scalar(parities: &[bool], c: F) -> Self {
        Self::monomial(parities, &vec![0; parities.len()], &vec![0; parities.len()], 0, c).unwrap()
    }

    pub fn one(parities: &[bool]) -> Self {
        Self::scalar(parities, F::one())
    }

    /// `ħ/i`.
    pub fn hbar(parities: &[bool]) -> Self {
        Self::monomial(parities, &vec![0; parities.len()], &vec![0; parities.len()], 1, F::one()).unwrap()
    }

    pub fn x(parities: &[bool], a: usize) -> Result<Self> {
        Self::generator(parities, a, true)
    }

    pub fn p(parities: &[bool], a: usize) -> Result<Self> {
        Self::generator(parities, a, false)
    }

    fn generator(parities: &[bool], a: usize, is_x: bool) -> Result<Self> {
        if a >= parities.len() {
            bail!(Shape, "generator index {a} out of range for {} pairs", parities.len());
        }
        let mut e = vec![0; parities.len()];
        e[a] = 1;
        let z = vec![0; parities.len()];
        if is_x {
            Self::monomial(parities, &e, &z, 0, F::one())
        } else {
            Self::monomial(parities, &z, &e, 0, F::one())
        }
    }

    /// `c·(ħ/i)ʰ x̂^α p̂^β` in normal order; zero if an odd generator is squared.
    pub fn monomial(parities: &[bool], x: &[u16], p: &[u16], h: u32, c: F) -> Result<Self> {
        let n = parities.len();
        if x.len() != n || p.len() != n {
            bail!(Shape, "exponent vectors must have length {n}");
        }
        let mut out = Self::zero(parities);
        let squared = parities.iter().enumerate().any(|(a, &o)| o && (x[a] > 1 || p[a] > 1));
        if !squared && !c.is_zero() {
            out.terms.insert(Mono { x: x.to_vec(), p: p.to_vec(), h }, c);
        }
        Ok(out)
    }

    pub fn parities(&self) -> &[bool] {
        &self.parities
    }

    pub fn n(&self) -> usize {
        self.parities.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(x-exponents, p-exponents, hbar power, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&[u16], &[u16], u32, &F)> {
        self.terms.iter().map(|(m, c)| (m.x.as_slice(), m.p.as_slice(), m.h, c))
    }

    pub fn coeff(&self, x: &[u16], p: &[u16], h: u32) -> F {
        self.terms.get(&Mono { x: x.to_vec(), p: p.to_vec(), h }).cloned().unwrap_or_else(F::zero)
    }

    /// Highest total degree in `x̂, p̂`.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    fn mono_parity(&self, m: &Mono) -> bool {
        self.parities.iter().zip(m.x.iter().zip(&m.p)).filter(|(&o, (&a, &b))| o && (a + b) % 2 == 1).count() % 2 == 1
    }

    /// `Some(parity)` for homogeneous elements, `Some(false)` for zero.
    pub fn parity(&self) -> Option<bool> {
        let mut ps = self.terms.keys().map(|m| self.mono_parity(m));
        let first = ps.next().unwrap_or(false);
        ps.all(|p| p == first).then_some(first)
    }

    fn part(&self, odd: bool) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| self.mono_parity(m) == odd).map(|(m, c)| (m.clone(), c.clone())).collect();
        WeylElement { parities: self.parities.clone(), terms }
    }

    fn add_term(&mut self, m: Mono, c: F) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::zero(&self.parities);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.parities != other.parities {
            bail!(Shape, "Weyl elements on different pairs: {:?} vs {:?}", self.parities, other.parities);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(&-F::one()))
    }

    /// `x̂ᵃ · m`, appended to `out` with coefficient `c`.
    fn left_x(&self, a: usize, m: &Mono, c: F, out: &mut Self) {
        let odd = self.parities[a];
        if odd && m.x[a] >= 1 {
            return;
        }
        let passed = (0..a).filter(|&b| self.parities[b] && m.x[b] % 2 == 1).count() % 2 == 1;
        let mut nm = m.clone();
        nm.x[a] += 1;
        out.add_term(nm, c * sign::<F>(odd && passed));
    }

    /// `p̂_a · m = ±x̂^γ p̂_a p̂^δ + (ħ/i)(∂⃗_a x̂^γ) p̂^δ`.
    fn left_p(&self, a: usize, m: &Mono, c: F, out: &mut Self) {
        let odd = self.parities[a];
        let odd_count = |e: &[u16], upto: usize| (0..upto).filter(|&b| self.parities[b] && e[b] % 2 == 1).count() % 2 == 1;
        if !(odd && m.p[a] >= 1) {
            let through_x = odd_count(&m.x, self.n());
            let into_p = odd_count(&m.p, a);
            let mut nm = m.clone();
            nm.p[a] += 1;
            out.add_term(nm, c.clone() * sign::<F>(odd && (through_x != into_p)));
        }
        if m.x[a] >= 1 {
            let mut nm = m.clone();
            nm.x[a] -= 1;
            nm.h += 1;
            let s = sign::<F>(odd && odd_count(&m.x, a));
            out.add_term(nm, c * s * F::from_i64(i64::from(m.x[a])));
        }
    }

    /// Normal-ordered product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let n = self.n();
        let mut out = Self::zero(&self.parities);
        for (m1, c1) in &self.terms {
            let mut acc = Self::zero(&self.parities);
            for (m2, c2) in &other.terms {
                let mut m = m2.clone();
                m.h += m1.h;
                acc.add_term(m, c1.clone() * c2.clone());
            }
            for a in (0..n).rev() {
                for _ in 0..m1.p[a] {
                    acc = self.apply(&acc, |s, m, c, o| s.left_p(a, m, c, o));
                }
            }
            for a in (0..n).rev() {
                for _ in 0..m1.x[a] {
                    acc = self.apply(&acc, |s, m, c, o| s.left_x(a, m, c, o));
                }
            }
            out = out.checked_add(&acc)?;
        }
        Ok(out)
    }

    fn apply(&self, e: &Self, f: impl Fn(&Self, &Mono, F, &mut Self)) -> Self {
        let mut out = Self::zero(&self.parities);
        for (m, c) in &e.terms {
            f(self, m, c.clone(), &mut out);
        }
        out
    }

    /// Space `[x, p]` with the pair parities and the given bound.
    pub fn symbol_space(&self, trunc: u32) -> Result<Arc<JetSpace>> {
        JetSpace::new(vec![(Block::with_parities("x", &self.parities), trunc), (Block::with_parities("p", &self.parities), trunc)])
    }

    /// Normal-ordered quantization of a jet over blocks `x`, `p` and
    /// optionally `hbar` (powers of `ħ/i`): `xᵅpᵝ ↦ x̂ᵅp̂ᵝ`.
    pub fn from_symbol(symbol: &Jet<F>) -> Result<Self> {
        let space = symbol.space();
        let (Some(xb), Some(pb)) = (space.block("x"), space.block("p")) else {
            bail!(Shape, "symbol needs blocks `x` and `p`, got {space}");
        };
        if xb.odd != pb.odd {
            bail!(Shape, "`x` and `p` blocks must have the same parities");
        }
        if space.blocks().iter().any(|b| !["x", "p", "hbar"].contains(&b.name.as_str())) {
            bail!(Shape, "symbol may only have blocks `x`, `p` and `hbar`, got {space}");
        }
        let (xi, pi) = (space.block_index("x").unwrap(), space.block_index("p").unwrap());
        let hi = space.block_index("hbar");
        let n = xb.dim;
        let mut out = Self::zero(&xb.odd);
        for (factors, c) in symbol.terms() {
            let mut m = Mono { x: vec![0; n], p: vec![0; n], h: 0 };
            for (v, e) in factors {
                if v.block == xi {
                    m.x[v.index] = e;
                } else if v.block == pi {
                    m.p[v.index] = e;
                } else if Some(v.block) == hi {
                    m.h = u32::from(e);
                }
            }
            out.add_term(m, c.clone());
        }
        Ok(out)
    }

    /// Classical symbol at `ħ = 0` over `[x, p]`, bounded by the degree of the element.
    pub fn principal_symbol(&self) -> Jet<F> {
        let t = self.degree().unwrap_or(0).max(1);
        let space = self.symbol_space(t).expect("valid blocks");
        let mut j = Jet::zero(&space);
        for (m, c) in self.terms.iter().filter(|(m, _)| m.h == 0) {
            let mut f: Vec<(Var, u16)> = Vec::new();
            for (a, &e) in m.x.iter().enumerate() {
                f.push((Var { block: 0, index: a }, e));
            }
            for (a, &e) in m.p.iter().enumerate() {
                f.push((Var { block: 1, index: a }, e));
            }
            j = &j + &Jet::monomial(&space, &f, c.clone());
        }
        j
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> WeylElement<G> {
        let mut out = WeylElement::zero(&self.parities);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }
}

impl<F: Field> Add for &WeylElement<F> {
    type Output = WeylElement<F>;
    fn add(self, rhs: Self) -> WeylElement<F> {
        self.checked_add(rhs).expect("Weyl elements on the same pairs")
    }
}

impl<F: Field> Sub for &WeylElement<F> {
    type Output = WeylElement<F>;
    fn sub(self, rhs: Self) -> WeylElement<F> {
        self.checked_sub(rhs).expect("Weyl elements on the same pairs")
    }
}

impl<F: Field> Mul for &WeylElement<F> {
    type Output = WeylElement<F>;
    fn mul(self, rhs: Self) -> WeylElement<F> {
        self.checked_mul(rhs).expect("Weyl elements on the same pairs")
    }
}

impl<F: Field> Neg for &WeylElement<F> {
    type Output = WeylElement<F>;
    fn neg(self) -> WeylElement<F> {
        self.scale(&-F::one())
    }
}

impl<F: JsonCoeff> WeylElement<F> {
    /// `{"parities": [...], "terms": [{"x": [...], "p": [...], "hbar": k, "c": coeff}]}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> =
            self.terms.iter().map(|(m, c)| json!({"x": m.x, "p": m.p, "hbar": m.h, "c": scalar_to_json(c)})).collect();
        json!({"parities": self.parities, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let parities: Vec<bool> = match v.get("parities") {
            Some(p) => serde_json::from_value(p.clone()).map_err(|e| crate::error::Error::Parse(format!("parities: {e}")))?,
            None => match v.get("n").and_then(Value::as_u64) {
                Some(n) => vec![false; n as usize],
                None => bail!(Parse, "Weyl element needs `parities` or `n`"),
            },
        };
        let n = parities.len();
        let mut out = Self::zero(&parities);
        let Some(terms) = v.get("terms").and_then(Value::as_array) else { bail!(Parse, "Weyl element needs a `terms` array") };
        for t in terms {
            let exps = |key: &str| -> Result<Vec<u16>> {
                match t.get(key) {
                    None => Ok(vec![0; n]),
                    Some(e) => {
                        let e: Vec<u16> = serde_json::from_value(e.clone()).map_err(|err| crate::error::Error::Parse(format!("`{key}`: {err}")))?;
                        if e.len() != n {
                            bail!(Parse, "`{key}` has {} exponents, expected {n}", e.len());
                        }
                        Ok(e)
                    }
                }
            };
            let h = t.get("hbar").map_or(Some(0), Value::as_u64).ok_or_else(|| crate::error::Error::Parse("`hbar` must be a count".into()))?;
            let Some(c) = t.get("c") else { bail!(Parse, "term without coefficient `c`") };
            let m = Self::monomial(&parities, &exps("x")?, &exps("p")?, h as u32, scalar_from_json(c)?)?;
            out = out.checked_add(&m)?;
        }
        Ok(out)
    }
}

/// Normal-ordered product `ab`.
pub fn weyl_mul<F: Field>(a: &WeylElement<F>, b: &WeylElement<F>) -> Result<WeylElement<F>> {
    a.checked_mul(b)
}

/// Supercommutator `[a, b] = ab − (−1)^{|a||b|}ba`, extended bilinearly to
/// inhomogeneous elements.
pub fn supercommutator<F: Field>(a: &WeylElement<F>, b: &WeylElement<F>) -> Result<WeylElement<F>> {
    a.check_shape(b)?;
    let mut out = WeylElement::zero(a.parities());
    for pa in [false, true] {
        for pb in [false, true] {
            let (x, y) = (a.part(pa), b.part(pb));
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let xy = x.checked_mul(&y)?;
            let yx = y.checked_mul(&x)?;
            out = out.checked_add(&xy.checked_sub(&yx.scale(&sign(pa && pb)))?)?;
        }
    }
    Ok(out)
}

/// `{a, b}_ħ = (i/ħ)[a, b]`; the division by `ħ/i` is exact.
pub fn quantum_poisson<F: Field>(a: &WeylElement<F>, b: &WeylElement<F>) -> Result<WeylElement<F>> {
    let c = supercommutator(a, b)?;
    let mut out = WeylElement::zero(a.parities());
    for (m, v) in &c.terms {
        if m.h == 0 {
            bail!(Internal, "commutator term {m:?} has no factor of ħ");
        }
        let mut nm = m.clone();
        nm.h -= 1;
        out.add_term(nm, v.clone());
    }
    Ok(out)
}

/// Principal symbol (`ħ = 0`) as a jet over `[x, p]`.
pub fn principal_symbol<F: Field>(a: &WeylElement<F>) -> Jet<F> {
    a.principal_symbol()
}

/// Classical bracket `{f, g} = f∂⃖_{p_a}·∂⃗_{xᵃ}g − (−1)^ã f∂⃖_{xᵃ}·∂⃗_{p_a}g` of jets
/// over blocks `x`, `p`; the result is bounded by the sum of the bounds.
pub fn poisson_bracket<F: Field>(f: &Jet<F>, g: &Jet<F>) -> Result<Jet<F>> {
    let (Some(xb), Some(pb)) = (f.space().block("x"), f.space().block("p")) else {
        bail!(Shape, "bracket needs blocks `x` and `p`, got {}", f.space());
    };
    if xb.odd != pb.odd {
        bail!(Shape, "`x` and `p` blocks must have the same parities");
    }
    let mut space = f.space().union_with(g.space(), &[])?;
    for b in ["x", "p"] {
        let t = f.space().trunc_of(b).unwrap() + g.space().trunc_of(b).unwrap_or(0);
        space = space.with_trunc(b, t)?;
    }
    let (f, g) = (f.embed(&space)?, g.embed(&space)?);
    let mut out = Jet::zero(&space);
    for (a, &odd) in xb.odd.clone().iter().enumerate() {
        let (x, p) = (space.var("x", a)?, space.var("p", a)?);
        let first = &f.derivative(p, Side::Right)? * &g.derivative(x, Side::Left)?;
        let second = &f.derivative(x, Side::Right)? * &g.derivative(p, Side::Left)?;
        out = &(&out + &first) - &second.scale(&sign(odd));
    }
    Ok(out)
}

fn check_quadratic<F: Field>(h: &Jet<F>) -> Result<()> {
    let space = h.space();
    let (xi, pi) = match (space.block_index("x"), space.block_index("p")) {
        (Some(x), Some(p)) => (x, p),
        _ => bail!(Shape, "Hamiltonian needs blocks `x` and `p`, got {space}"),
    };
    for (factors, _) in h.terms() {
        let d: u32 = factors.iter().filter(|(v, _)| v.block == xi || v.block == pi).map(|&(_, e)| u32::from(e)).sum();
        if d > 2 {
            bail!(Domain, "Q_s is defined for Hamiltonians of degree at most 2");
        }
    }
    Ok(())
}

/// `Q_s`: `p_a xᵇ ↦ s p̂_a x̂ᵇ + (1 − s)(−1)^{ãb̃} x̂ᵇ p̂_a`, all other monomials of
/// degree ≤ 2 in normal order.
pub fn quantize_s<F: Field>(h: &Jet<F>, s: &F) -> Result<WeylElement<F>> {
    check_quadratic(h)?;
    let q0 = WeylElement::from_symbol(h)?;
    let parities = q0.parities().to_vec();
    let space = h.space();
    let mut shift = F::zero();
    for (a, &odd) in parities.iter().enumerate() {
        let c = h.coeff(&[(space.var("x", a)?, 1), (space.var("p", a)?, 1)]);
        shift = shift + c * sign::<F>(odd);
    }
    q0.checked_add(&WeylElement::hbar(&parities).scale(&(shift * s.clone())))
}

/// The scalar `d` in `{Q_s H₁, Q_s H₂}_ħ − Q_s({H₁, H₂}) = d·(ħ/i)`.
pub fn ordering_defect<F: Field>(h1: &Jet<F>, h2: &Jet<F>, s: &F) -> Result<F> {
    let lhs = quantum_poisson(&quantize_s(h1, s)?, &quantize_s(h2, s)?)?;
    let rhs = quantize_s(&poisson_bracket(h1, h2)?, s)?;
    let d = lhs.checked_sub(&rhs)?;
    let mut out = F::zero();
    for (m, c) in &d.terms {
        if m.degree() != 0 || m.h != 1 {
            bail!(Internal, "ordering defect has a non-scalar term {m:?}");
        }
        out = c.clone();
    }
    Ok(out)
}

/// The 2-cocycle `c(H₁, H₂)`: the ordering defect divided by `1 − 2s`, or the
/// raw defect (zero) at `s = ½`.
pub fn cocycle_defect<F: Field>(h1: &Jet<F>, h2: &Jet<F>, s: &F) -> Result<F> {
    let d = ordering_defect(h1, h2, s)?;
    let k = F::one() - F::from_i64(2) * s.clone();
    Ok(match k.inv() {
        Some(i) => d * i,
        None => d,
    })
}

/// Basis `(x̂¹…x̂ⁿ, p̂₁…p̂ₙ)` of the linear span `L`.
pub fn linear_basis<F: Field>(parities: &[bool]) -> Vec<WeylElement<F>> {
    let n = parities.len();
    (0..n).map(|a| WeylElement::x(parities, a).unwrap()).chain((0..n).map(|a| WeylElement::p(parities, a).unwrap())).collect()
}

/// Matrix of `(i/ħ)[Ĥ, ·]` on `L` in the basis of [`linear_basis`]: column `j`
/// holds the image of the `j`-th basis vector. Scalar parts of the images
/// (present for linear `Ĥ`) are dropped.
pub fn adjoint_on_l<F: Field>(h: &WeylElement<F>) -> Result<Vec<Vec<F>>> {
    if h.parity() != Some(false) {
        bail!(Parity, "the adjoint action is defined for even Ĥ");
    }
    let n = h.n();
    let mut m = vec![vec![F::zero(); 2 * n]; 2 * n];
    for (j, e) in linear_basis::<F>(h.parities()).iter().enumerate() {
        let img = quantum_poisson(h, e)?;
        for (mono, c) in &img.terms {
            match (mono.degree(), mono.h) {
                (0, _) => {}
                (1, 0) => {
                    let row = match mono.x.iter().position(|&e| e == 1) {
                        Some(a) => a,
                        None => n + mono.p.iter().position(|&e| e == 1).unwrap(),
                    };
                    m[row][j] = c.clone();
                }
                _ => bail!(Domain, "[Ĥ, L] leaves L: term {mono:?}"),
            }
        }
    }
    Ok(m)
}

/// Canonical pairing `J_ij = {e_i, e_j}_ħ` on the basis of [`linear_basis`]:
/// `{p_a, xᵃ} = 1`, `{xᵃ, p_a} = −1` for even and `+1` for odd pairs.
pub fn canonical_pairing<F: Field>(parities: &[bool]) -> Vec<Vec<F>> {
    let n = parities.len();
    let mut j = vec![vec![F::zero(); 2 * n]; 2 * n];
    for (a, &odd) in parities.iter().enumerate() {
        j[n + a][a] = F::one();
        j[a][n + a] = if odd { F::one() } else { -F::one() };
    }
    j
}

#[cfg(test)]
mod tests;
