use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{bail, Result};
use crate::field::Field;

use super::space::{JetSpace, Var};

pub(crate) type Key = Vec<u16>;

/// Which side an odd derivative acts from.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A truncated multivariate polynomial with coefficients in `F`.
///
/// Odd variables have exponents 0 or 1 and anticommute; products reorder
/// them with the Koszul sign. Every product is re-truncated per block.
#[derive(Clone)]
pub struct Jet<F> {
    space: Arc<JetSpace>,
    terms: BTreeMap<Key, F>,
    precision: Vec<u32>,
}

impl<F: Field> PartialEq for Jet<F> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space) && self.terms == other.terms
    }
}

/// Sign of moving the odd factors of `b` past those of `a`, or `None` when an
/// odd variable repeats.
pub(crate) fn koszul_sign(space: &JetSpace, a: &[u16], b: &[u16]) -> Option<bool> {
    let mut a_after = 0u32;
    let mut neg = false;
    for &s in space.odd_slots().iter().rev() {
        if b[s] == 1 {
            if a[s] == 1 {
                return None;
            }
            if a_after % 2 == 1 {
                neg = !neg;
            }
        }
        if a[s] == 1 {
            a_after += 1;
        }
    }
    Some(neg)
}

impl<F: Field> Jet<F> {
    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Jet { space: space.clone(), terms: BTreeMap::new(), precision: space.trunc().to_vec() }
    }

    pub fn constant(space: &Arc<JetSpace>, c: F) -> Self {
        let mut j = Self::zero(space);
        if !c.is_zero() {
            j.terms.insert(vec![0; space.key_len()], c);
        }
        j
    }

    pub fn one(space: &Arc<JetSpace>) -> Self {
        Self::constant(space, F::one())
    }

    pub fn var(space: &Arc<JetSpace>, v: Var) -> Self {
        Self::monomial(space, &[(v, 1)], F::one())
    }

    /// `c · v₁^e₁ ⋯ vₖ^eₖ` with the factors multiplied in the listed order.
    pub fn monomial(space: &Arc<JetSpace>, factors: &[(Var, u16)], c: F) -> Self {
        let mut acc = Self::constant(space, c);
        for &(v, e) in factors {
            for _ in 0..e {
                acc = &acc * &Self::raw_var(space, v);
            }
        }
        acc
    }

    fn raw_var(space: &Arc<JetSpace>, v: Var) -> Self {
        let mut key = vec![0u16; space.key_len()];
        key[space.slot(v)] = 1;
        key[space.degree_slot(v.block)] = 1;
        let mut j = Self::zero(space);
        if space.admits(&key) {
            j.terms.insert(key, F::one());
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Per-block degree through which this jet is known exactly.
    pub fn precision(&self) -> &[u32] {
        &self.precision
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

    /// Terms as (exponent per variable in space order, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (Vec<(Var, u16)>, &F)> + '_ {
        self.terms.iter().map(move |(k, c)| {
            let exps = self
                .space
                .all_vars()
                .filter_map(|v| {
                    let e = k[self.space.slot(v)];
                    (e > 0).then_some((v, e))
                })
                .collect();
            (exps, c)
        })
    }

    /// Coefficient of the monomial with the given exponents (others zero).
    pub fn coeff(&self, exps: &[(Var, u16)]) -> F {
        let mut key = vec![0u16; self.space.key_len()];
        for &(v, e) in exps {
            key[self.space.slot(v)] += e;
            key[self.space.degree_slot(v.block)] += e;
        }
        self.terms.get(&key).cloned().unwrap_or_else(F::zero)
    }

    pub fn constant_term(&self) -> F {
        self.terms.get(&vec![0u16; self.space.key_len()]).cloned().unwrap_or_else(F::zero)
    }

    pub fn exponent(&self, key: &[u16], v: Var) -> u16 {
        key[self.space.slot(v)]
    }

    /// Parity of one monomial key.
    fn key_parity(space: &JetSpace, key: &[u16]) -> bool {
        space.odd_slots().iter().filter(|&&s| key[s] == 1).count() % 2 == 1
    }

    /// `Some(p)` when every term has parity `p` (zero jets report `Some(false)`).
    pub fn parity(&self) -> Option<bool> {
        let mut it = self.terms.keys().map(|k| Self::key_parity(&self.space, k));
        match it.next() {
            None => Some(false),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(false)
    }

    pub fn block_degree_of(&self, key: &[u16], block: usize) -> u32 {
        u32::from(key[self.space.degree_slot(block)])
    }

    /// Smallest total degree in `block` among the terms.
    pub fn valuation(&self, block: usize) -> Option<u32> {
        self.terms.keys().map(|k| self.block_degree_of(k, block)).min()
    }

    /// Largest total degree in `block` among the terms.
    pub fn max_degree(&self, block: usize) -> Option<u32> {
        self.terms.keys().map(|k| self.block_degree_of(k, block)).max()
    }

    /// Keep the terms accepted by `keep(degree-in-block)`.
    pub fn filter_block_degree(&self, block: usize, keep: impl Fn(u32) -> bool) -> Self {
        let mut out = self.clone();
        out.terms.retain(|k, _| keep(u32::from(k[self.space.degree_slot(block)])));
        out
    }

    pub fn filter_terms(&self, keep: impl Fn(&[(Var, u16)]) -> bool) -> Self {
        let mut out = Self::zero(&self.space);
        out.precision = self.precision.clone();
        for ((exps, c), k) in self.terms().zip(self.terms.keys()) {
            if keep(&exps) {
                out.terms.insert(k.clone(), c.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut out = Self::zero(&self.space);
        out.precision = self.precision.clone();
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            let p = v.clone() * c.clone();
            if !p.is_zero() {
                out.terms.insert(k.clone(), p);
            }
        }
        out
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> Jet<G> {
        let mut out = Jet::<G>::zero(&self.space);
        out.precision = self.precision.clone();
        for (k, v) in &self.terms {
            let g = f(v);
            if !g.is_zero() {
                out.terms.insert(k.clone(), g);
            }
        }
        out
    }

    /// Largest coefficient magnitude (0 for the zero jet).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.terms.values().all(Field::is_finite)
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            bail!(Shape, "jet spaces differ: {} vs {}", self.space, other.space)
        }
    }

    fn min_precision(&self, other: &Self) -> Vec<u32> {
        self.precision.iter().zip(&other.precision).map(|(a, b)| *a.min(b)).collect()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let mut out = self.clone();
        out.precision = self.min_precision(other);
        for (k, v) in &other.terms {
            add_term(&mut out.terms, k, v.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let space = &self.space;
        let mut terms = BTreeMap::new();
        let mut key = vec![0u16; space.key_len()];
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                for (i, slot) in key.iter_mut().enumerate() {
                    *slot = ka[i] + kb[i];
                }
                if !space.admits(&key) {
                    continue;
                }
                let Some(neg) = koszul_sign(space, ka, kb) else { continue };
                let p = ca.clone() * cb.clone();
                add_term(&mut terms, &key, if neg { -p } else { p });
            }
        }
        Ok(Jet { space: space.clone(), terms, precision: self.min_precision(other) })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.space);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in `v`.
    pub fn derivative(&self, v: Var, side: Side) -> Result<Self> {
        let space = &self.space;
        if v.block >= space.blocks().len() || v.index >= space.blocks()[v.block].dim {
            bail!(Shape, "derivative in unknown variable {:?}", v);
        }
        let slot = space.slot(v);
        let odd = space.is_odd(v);
        let mut out = Self::zero(space);
        out.precision = self.precision.clone();
        out.precision[v.block] = out.precision[v.block].saturating_sub(1);
        for (k, c) in &self.terms {
            let e = k[slot];
            if e == 0 {
                continue;
            }
            let mut nk = k.clone();
            nk[slot] -= 1;
            nk[space.degree_slot(v.block)] -= 1;
            let mut coef = c.clone() * F::from_i64(i64::from(e));
            if odd {
                let crossed = space
                    .odd_slots()
                    .iter()
                    .filter(|&&s| s != slot && k[s] == 1 && ((s < slot) == (side == Side::Left)))
                    .count();
                if crossed % 2 == 1 {
                    coef = -coef;
                }
            }
            add_term(&mut out.terms, &nk, coef);
        }
        Ok(out)
    }

    /// Left derivative; the usual choice for even jets.
    pub fn d(&self, v: Var) -> Self {
        self.derivative(v, Side::Left).expect("variable of this space")
    }

    /// Substitute jets (over `target`) for variables of this jet.
    ///
    /// Variables without an assignment map to the variable of the same block
    /// name and index in `target`. Images must have the parity of the variable
    /// they replace. Unless `evaluate` is set, images must have zero constant
    /// term.
    pub fn substitute(&self, target: &Arc<JetSpace>, assignment: &[(Var, Jet<F>)], evaluate: bool) -> Result<Self> {
        let space = &self.space;
        let mut images: HashMap<Var, Jet<F>> = HashMap::new();
        for (v, img) in assignment {
            if !(Arc::ptr_eq(img.space(), target) || **img.space() == **target) {
                bail!(Shape, "substituted jet for {} lives in {}, expected {}", space.var_name(*v), img.space(), target);
            }
            let want = space.is_odd(*v);
            match img.parity() {
                Some(p) if p == want || img.is_zero() => {}
                _ => bail!(Parity, "image of {} must be {}", space.var_name(*v), if want { "odd" } else { "even" }),
            }
            if !evaluate && !img.constant_term().is_zero() {
                bail!(Convergence, "image of {} has a nonzero constant term", space.var_name(*v));
            }
            images.insert(*v, img.clone());
        }
        let mut used = vec![false; space.key_len()];
        for k in self.terms.keys() {
            for (i, &e) in k.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        for v in space.all_vars() {
            if images.contains_key(&v) || !used[space.slot(v)] {
                continue;
            }
            let name = &space.blocks()[v.block].name;
            let tv = target
                .var(name, v.index)
                .map_err(|_| crate::error::Error::Shape(format!("variable {} has no counterpart in {}", space.var_name(v), target)))?;
            if target.is_odd(tv) != space.is_odd(v) {
                bail!(Parity, "variable {} changes parity in target space", space.var_name(v));
            }
            images.insert(v, Jet::raw_var(target, tv));
        }
        let mut powers: HashMap<(Var, u16), Jet<F>> = HashMap::new();
        let mut out = Self::zero(target);
        let vars: Vec<Var> = space.all_vars().collect();
        for (k, c) in &self.terms {
            let mut acc = Self::constant(target, c.clone());
            for &v in &vars {
                let e = k[space.slot(v)];
                if e == 0 {
                    continue;
                }
                let p = match powers.get(&(v, e)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = images[&v].pow(u32::from(e));
                        powers.insert((v, e), p.clone());
                        p
                    }
                };
                acc = &acc * &p;
                if acc.is_zero() {
                    break;
                }
            }
            out = &out + &acc;
        }
        let mut precision = target.trunc().to_vec();
        for img in images.values() {
            for (p, q) in precision.iter_mut().zip(img.precision()) {
                *p = (*p).min(*q);
            }
        }
        out.precision = precision;
        Ok(out)
    }

    /// Re-express in `target`, matching variables by block name and index.
    pub fn embed(&self, target: &Arc<JetSpace>) -> Result<Self> {
        if Arc::ptr_eq(&self.space, target) || *self.space == **target {
            return Ok(self.clone());
        }
        self.substitute(target, &[], true)
    }

    /// Same terms, block renamed (no arithmetic).
    pub fn rename_block(&self, from: &str, to: &str) -> Result<Self> {
        let space = self.space.renamed(from, to)?;
        Ok(Jet { space, terms: self.terms.clone(), precision: self.precision.clone() })
    }

    /// Set the variables of `block` to numbers and drop the block.
    pub fn evaluate_block(&self, block: &str, values: &[F]) -> Result<Self> {
        let target = self.space.without_block(block)?;
        let vars = self.space.vars(block)?;
        if vars.len() != values.len() {
            bail!(Shape, "block `{block}` has {} variables, got {} values", vars.len(), values.len());
        }
        let assignment: Vec<(Var, Jet<F>)> = vars
            .iter()
            .zip(values)
            .map(|(&v, x)| (v, Jet::constant(&target, x.clone())))
            .collect();
        if vars.iter().zip(values).any(|(&v, x)| self.space.is_odd(v) && !x.is_zero()) {
            bail!(Parity, "odd variables can only be evaluated at zero");
        }
        self.substitute(&target, &assignment, true)
    }

    /// Numeric value at a point given for every variable (space order).
    pub fn eval(&self, point: &[F]) -> Result<F> {
        let vars: Vec<Var> = self.space.all_vars().collect();
        if vars.len() != point.len() {
            bail!(Shape, "expected {} coordinates, got {}", vars.len(), point.len());
        }
        let mut total = F::zero();
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for (v, x) in vars.iter().zip(point) {
                for _ in 0..k[self.space.slot(*v)] {
                    t = t * x.clone();
                }
            }
            total = total + t;
        }
        Ok(total)
    }

    /// Coefficient jet of `v^e` (with `v` even), as a jet in the same space.
    pub fn coefficient_of_power(&self, v: Var, e: u16) -> Self {
        let slot = self.space.slot(v);
        let mut out = Self::zero(&self.space);
        out.precision = self.precision.clone();
        for (k, c) in &self.terms {
            if k[slot] == e {
                let mut nk = k.clone();
                nk[slot] = 0;
                nk[self.space.degree_slot(v.block)] -= e;
                out.terms.insert(nk, c.clone());
            }
        }
        out
    }

    /// Antiderivative in the even variable `v`, vanishing at `v = 0`; terms
    /// pushed past the truncation of `v` are dropped.
    pub fn integrate(&self, v: Var) -> Result<Self> {
        let space = &self.space;
        if space.is_odd(v) {
            bail!(Parity, "integration in an odd variable");
        }
        let slot = space.slot(v);
        let mut out = Self::zero(space);
        out.precision = self.precision.clone();
        for (k, c) in &self.terms {
            let mut nk = k.clone();
            nk[slot] += 1;
            nk[space.degree_slot(v.block)] += 1;
            if !space.admits(&nk) {
                continue;
            }
            let coef = c.clone() * F::from_ratio(1, i64::from(nk[slot]));
            add_term(&mut out.terms, &nk, coef);
        }
        Ok(out)
    }

    /// Divide by `v` (even), requiring every term to contain it.
    pub fn divide_by_var(&self, v: Var) -> Result<Self> {
        let slot = self.space.slot(v);
        let mut out = Self::zero(&self.space);
        out.precision = self.precision.clone();
        for (k, c) in &self.terms {
            if k[slot] == 0 {
                bail!(Internal, "term without a factor {} in exact division", self.space.var_name(v));
            }
            let mut nk = k.clone();
            nk[slot] -= 1;
            nk[self.space.degree_slot(v.block)] -= 1;
            out.terms.insert(nk, c.clone());
        }
        Ok(out)
    }
}

fn add_term<F: Field>(terms: &mut BTreeMap<Key, F>, k: &[u16], c: F) {
    if c.is_zero() {
        return;
    }
    match terms.get_mut(k) {
        Some(v) => {
            let s = v.clone() + c;
            if s.is_zero() {
                terms.remove(k);
            } else {
                *v = s;
            }
        }
        None => {
            terms.insert(k.to_vec(), c);
        }
    }
}

impl<F: Field> Add for &Jet<F> {
    type Output = Jet<F>;
    fn add(self, rhs: Self) -> Jet<F> {
        self.checked_add(rhs).expect("jet spaces differ")
    }
}

impl<F: Field> Sub for &Jet<F> {
    type Output = Jet<F>;
    fn sub(self, rhs: Self) -> Jet<F> {
        self.checked_sub(rhs).expect("jet spaces differ")
    }
}

impl<F: Field> Mul for &Jet<F> {
    type Output = Jet<F>;
    fn mul(self, rhs: Self) -> Jet<F> {
        self.checked_mul(rhs).expect("jet spaces differ")
    }
}

impl<F: Field> Neg for &Jet<F> {
    type Output = Jet<F>;
    fn neg(self) -> Jet<F> {
        self.scale(&-F::one())
    }
}

impl<F: Field> Add for Jet<F> {
    type Output = Jet<F>;
    fn add(self, rhs: Self) -> Jet<F> {
        &self + &rhs
    }
}

impl<F: Field> Sub for Jet<F> {
    type Output = Jet<F>;
    fn sub(self, rhs: Self) -> Jet<F> {
        &self - &rhs
    }
}

impl<F: Field> Mul for Jet<F> {
    type Output = Jet<F>;
    fn mul(self, rhs: Self) -> Jet<F> {
        &self * &rhs
    }
}

impl<F: Field> Neg for Jet<F> {
    type Output = Jet<F>;
    fn neg(self) -> Jet<F> {
        -&self
    }
}

impl<F: Field> fmt::Display for Jet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(exps, c)| {
                let mut s = format!("({c})");
                for (v, e) in exps {
                    s.push('*');
                    s.push_str(&self.space.var_name(v));
                    if e > 1 {
                        s.push_str(&format!("^{e}"));
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<F: Field> fmt::Debug for Jet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{} {}", self.space, self)
    }
}
