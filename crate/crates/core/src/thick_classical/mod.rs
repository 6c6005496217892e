//! Classical thick morphisms given by generating functions `S(x, q)`:
//! pullback of functions, the perturbed map, composition, the derivative
//! formula and the Hamilton–Jacobi relation for Hamiltonians.
//!
//! A generating function is a jet with a block `x` (source coordinates) and a
//! block `q` (target momenta); any further blocks are parameters such as a
//! formal `lambda` or `hbar`. Functions on the target use a block `y`,
//! Hamiltonians use blocks `x`/`p` (source) and `y`/`q` (target).

mod compose;
mod pullback;

pub use compose::{compose, ComposeMode};
pub(crate) use compose::compose_formal_critical;
pub use pullback::{derivative_check, hamilton_jacobi_residual, perturbed_map, pullback, PullbackMode, PullbackResult};

use std::sync::Arc;

use serde_json::Value;

use crate::error::{bail, Error, Result};
use crate::field::Field;
use crate::jet::json::{jet_from_json, jet_to_json, JsonCoeff};
use crate::jet::{Block, Jet, JetSpace};

/// Name of the formal parameter that grades composition.
pub const LAMBDA: &str = "lambda";
/// Name of the formal parameter that grades pullbacks.
pub const EPS: &str = "eps";

/// Generating function `S(x, q)` of a thick morphism `M₁ ⇛ M₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingFunction<F: Field> {
    s: Jet<F>,
}

impl<F: Field> GeneratingFunction<F> {
    pub fn new(s: Jet<F>) -> Result<Self> {
        let space = s.space();
        if space.block("x").is_none() || space.block("q").is_none() {
            bail!(Shape, "a generating function needs blocks `x` and `q`, got {space}");
        }
        if !s.is_even() {
            bail!(Parity, "generating function must be even");
        }
        Ok(GeneratingFunction { s })
    }

    /// `S = Σ xᵃ qₐ` on a space with the given parities.
    pub fn identity_super(parities: &[bool], x_trunc: u32, q_trunc: u32) -> Result<Self> {
        let space = JetSpace::new(vec![(Block::with_parities("x", parities), x_trunc), (Block::with_parities("q", parities), q_trunc)])?;
        let mut s = Jet::zero(&space);
        for i in 0..parities.len() {
            s = &s + &(&Jet::var(&space, space.var("x", i)?) * &Jet::var(&space, space.var("q", i)?));
        }
        Self::new(s)
    }

    /// Identity morphism of an `n`-dimensional manifold.
    pub fn identity(n: usize, trunc: u32) -> Result<Self> {
        Self::identity_super(&vec![false; n], trunc, trunc)
    }

    /// `S = φⁱ(x) qᵢ` for jets `φⁱ` over a space with an `x` block.
    pub fn from_map(phi: &[Jet<F>], target_parities: &[bool], q_trunc: u32) -> Result<Self> {
        if phi.len() != target_parities.len() {
            bail!(Shape, "{} components for a target of dimension {}", phi.len(), target_parities.len());
        }
        let base = match phi.first() {
            Some(p) => p.space().clone(),
            None => bail!(Shape, "from_map needs at least one component"),
        };
        let space = base.with_block(Block::with_parities("q", target_parities), q_trunc)?;
        let mut s = Jet::zero(&space);
        for (i, (p, &odd)) in phi.iter().zip(target_parities).enumerate() {
            if !(p.is_zero() || p.parity() == Some(odd)) {
                bail!(Parity, "component {i} of the map must be {}", if odd { "odd" } else { "even" });
            }
            s = &s + &(&p.embed(&space)? * &Jet::var(&space, space.var("q", i)?));
        }
        Self::new(s)
    }

    pub fn s(&self) -> &Jet<F> {
        &self.s
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.s.space()
    }

    pub fn n1(&self) -> usize {
        self.space().block("x").map_or(0, |b| b.dim)
    }

    pub fn n2(&self) -> usize {
        self.space().block("q").map_or(0, |b| b.dim)
    }

    pub fn source_parities(&self) -> Vec<bool> {
        self.space().block("x").map(|b| b.odd.clone()).unwrap_or_default()
    }

    pub fn target_parities(&self) -> Vec<bool> {
        self.space().block("q").map(|b| b.odd.clone()).unwrap_or_default()
    }

    fn q_block(&self) -> usize {
        self.space().block_index("q").expect("checked on construction")
    }

    fn without_q(&self, j: &Jet<F>) -> Jet<F> {
        j.evaluate_block("q", &vec![F::zero(); self.n2()]).expect("q block present")
    }

    /// `S⁰(x)`, the `q`-free part, as a jet without the `q` block.
    pub fn s0(&self) -> Jet<F> {
        self.without_q(&self.s)
    }

    /// `φⁱ(x) = (−1)^ĩ ∂S/∂qᵢ` at `q = 0`, as jets without the `q` block.
    pub fn phi(&self) -> Vec<Jet<F>> {
        let qs = self.space().vars("q").expect("q block");
        qs.iter()
            .map(|&v| {
                let d = self.without_q(&self.s.d(v));
                if self.space().is_odd(v) {
                    -&d
                } else {
                    d
                }
            })
            .collect()
    }

    /// `S⁺(x, q)`: all terms of degree at least two in `q`.
    pub fn s_plus(&self) -> Jet<F> {
        self.s.filter_block_degree(self.q_block(), |d| d >= 2)
    }

    /// Multiply `S⁺` by a new formal parameter `lambda` truncated at `order`;
    /// a generating function that already has a `lambda` block is returned as is.
    pub fn with_lambda(&self, order: u32) -> Result<Self> {
        if self.space().block(LAMBDA).is_some() {
            return Ok(self.clone());
        }
        let space = self.space().with_block(Block::even(LAMBDA, 1), order)?;
        let lambda = Jet::var(&space, space.var(LAMBDA, 0)?);
        let low = self.s.filter_block_degree(self.q_block(), |d| d < 2).embed(&space)?;
        Self::new(&low + &(&lambda * &self.s_plus().embed(&space)?))
    }

    /// Every term of `q`-degree at least two contains `lambda`.
    pub fn is_lambda_graded(&self) -> bool {
        let Some(l) = self.space().block_index(LAMBDA) else { return false };
        self.s_plus().valuation(l).map_or(true, |v| v >= 1)
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> GeneratingFunction<G> {
        GeneratingFunction { s: self.s.map_coeffs(f) }
    }
}

impl<F: JsonCoeff> GeneratingFunction<F> {
    /// Jet JSON with additional `n1` and `n2` fields.
    pub fn to_json(&self) -> Value {
        let mut v = jet_to_json(&self.s);
        if let Value::Object(o) = &mut v {
            o.insert("n1".into(), self.n1().into());
            o.insert("n2".into(), self.n2().into());
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let s = jet_from_json(v)?;
        let gf = Self::new(s).map_err(|e| match e {
            Error::Parity(m) => Error::Parity(m),
            other => Error::Parse(other.to_string()),
        })?;
        for (key, want) in [("n1", gf.n1()), ("n2", gf.n2())] {
            if let Some(n) = v.get(key) {
                if n.as_u64() != Some(want as u64) {
                    bail!(Parse, "`{key}` = {n} does not match the jet blocks ({want})");
                }
            }
        }
        Ok(gf)
    }
}

#[cfg(test)]
mod tests;
