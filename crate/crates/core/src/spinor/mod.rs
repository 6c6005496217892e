//! Quadratic actions and the linear canonical relations they generate:
//! intertwining with linear Hamiltonians, classical and quantum composition,
//! and the Berezinian phase cocycle.
//!
//! An action is stored as the jet
//! `S(x, q) = s₀ + xᵃSₐ + Sⁱqᵢ + ½xᵃxᵇS_{ba} + xᵃSₐⁱqᵢ + ½S^{ij}q_jqᵢ`
//! over blocks `x`, `q` and optional parameter blocks (for instance odd
//! Grassmann parameters, or a grading parameter). The quantum part of the
//! constant term is kept multiplicatively: an action with weight `w` stands
//! for `S − (ħ/i)·½ ln w`, so composition stays exact over the rationals.
//!
//! Coefficients are read off with left derivatives in `x` and right
//! derivatives in `q`, so that `p_b = ∂S/∂x^b = xᵃS_{ab} + S_bⁱqᵢ + S_b` and
//! `yⁱ = ∂S/∂qᵢ (right) = xᵃSₐⁱ + S^{ij}q_j + Sⁱ`.

mod compose;
mod intertwine;
mod json;


pub use compose::{cocycle, cocycle_weight, compose_classical, compose_generating_functions, compose_quantum};
pub use intertwine::{intertwine_solve, LinearHamiltonian};

use std::sync::Arc;

use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::{Block, Jet, JetSpace, Side, Var};
use crate::thick_classical::GeneratingFunction;

/// Quadratic generating function with its accumulated quantum weight.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticAction<F: Field> {
    s: Jet<F>,
    weight: Jet<F>,
}

/// Matrix of jets over the parameter space.
pub type JetMatrix<F> = Vec<Vec<Jet<F>>>;

/// Space of `x`, `q` (both truncated at 2) and the given parameter blocks.
fn action_space(source: &[bool], target: &[bool], params: &JetSpace) -> Result<Arc<JetSpace>> {
    let mut blocks = vec![(Block::with_parities("x", source), 2), (Block::with_parities("q", target), 2)];
    blocks.extend(params.other_blocks(&[]));
    JetSpace::new(blocks)
}

impl<F: Field> QuadraticAction<F> {
    /// Wrap a jet of total degree ≤ 2 in `x` and `q`.
    pub fn new(s: Jet<F>) -> Result<Self> {
        let sp = s.space().clone();
        let (Some(xb), Some(qb)) = (sp.block("x"), sp.block("q")) else {
            bail!(Shape, "a quadratic action needs blocks `x` and `q`, got {sp}")
        };
        if !s.is_even() {
            bail!(Parity, "a quadratic action must be even");
        }
        let (xi, qi) = (sp.block_index("x").unwrap(), sp.block_index("q").unwrap());
        for (vars, _) in s.terms() {
            let deg: u32 = vars.iter().filter(|(v, _)| v.block == xi || v.block == qi).map(|(_, e)| u32::from(*e)).sum();
            if deg > 2 {
                bail!(Shape, "action has a term of degree {deg} in (x, q); only quadratic actions are allowed");
            }
        }
        let params = JetSpace::new(sp.other_blocks(&["x", "q"]))?;
        let target = action_space(&xb.odd, &qb.odd, &params)?;
        let s = s.embed(&target)?;
        Ok(QuadraticAction { weight: Jet::one(&params), s })
    }

    /// Build from coefficient jets over a parameter space `params`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_coefficient_jets(
        source: &[bool],
        target: &[bool],
        params: &Arc<JetSpace>,
        s0: &Jet<F>,
        s_a: &[Jet<F>],
        s_i: &[Jet<F>],
        s_ab: &JetMatrix<F>,
        s_ai: &JetMatrix<F>,
        s_ij: &JetMatrix<F>,
    ) -> Result<Self> {
        let (n, m) = (source.len(), target.len());
        let shape_ok = s_a.len() == n
            && s_i.len() == m
            && s_ab.len() == n
            && s_ab.iter().all(|r| r.len() == n)
            && s_ai.len() == n
            && s_ai.iter().all(|r| r.len() == m)
            && s_ij.len() == m
            && s_ij.iter().all(|r| r.len() == m);
        if !shape_ok {
            bail!(Shape, "coefficient blocks do not match a ({n}|…) → ({m}|…) action");
        }
        let sp = action_space(source, target, params)?;
        let x: Vec<Jet<F>> = (0..n).map(|a| Jet::var(&sp, Var { block: 0, index: a })).collect();
        let q: Vec<Jet<F>> = (0..m).map(|i| Jet::var(&sp, Var { block: 1, index: i })).collect();
        let e = |j: &Jet<F>| j.embed(&sp);
        let half = F::from_ratio(1, 2);
        let mut s = e(s0)?;
        for a in 0..n {
            s = &s + &(&x[a] * &e(&s_a[a])?);
            for b in 0..n {
                s = &s + &(&(&x[a] * &x[b]) * &e(&s_ab[b][a])?).scale(&half);
            }
            for i in 0..m {
                s = &s + &(&(&x[a] * &e(&s_ai[a][i])?) * &q[i]);
            }
        }
        for i in 0..m {
            s = &s + &(&e(&s_i[i])? * &q[i]);
            for j in 0..m {
                s = &s + &(&(&e(&s_ij[i][j])? * &q[j]) * &q[i]).scale(&half);
            }
        }
        Self::new(s)
    }

    /// Build from scalar coefficients; quadratic blocks are super-symmetrized.
    #[allow(clippy::too_many_arguments)]
    pub fn from_coefficients(
        source: &[bool],
        target: &[bool],
        s0: F,
        s_a: &[F],
        s_i: &[F],
        s_ab: &[Vec<F>],
        s_ai: &[Vec<F>],
        s_ij: &[Vec<F>],
    ) -> Result<Self> {
        let p = JetSpace::new(vec![])?;
        let c = |v: &F| Jet::constant(&p, v.clone());
        let vec = |v: &[F]| v.iter().map(c).collect::<Vec<_>>();
        let mat = |m: &[Vec<F>]| m.iter().map(|r| vec(r)).collect::<Vec<_>>();
        Self::from_coefficient_jets(source, target, &p, &c(&s0), &vec(s_a), &vec(s_i), &mat(s_ab), &mat(s_ai), &mat(s_ij))
    }

    /// `S = Σ xᵃqₐ`.
    pub fn identity(parities: &[bool]) -> Result<Self> {
        Self::new(GeneratingFunction::identity_super(parities, 2, 2)?.s().clone())
    }

    pub fn from_generating_function(g: &GeneratingFunction<F>) -> Result<Self> {
        Self::new(g.s().clone())
    }

    pub fn to_generating_function(&self) -> Result<GeneratingFunction<F>> {
        GeneratingFunction::new(self.s.clone())
    }

    /// Same action with the given weight (a jet over the parameter space).
    pub fn with_weight(&self, weight: Jet<F>) -> Result<Self> {
        let weight = weight.embed(self.params())?;
        if weight.constant_term().is_zero() {
            bail!(Singular, "weight must have an invertible constant term");
        }
        Ok(QuadraticAction { s: self.s.clone(), weight })
    }

    pub fn s(&self) -> &Jet<F> {
        &self.s
    }

    pub fn weight(&self) -> &Jet<F> {
        &self.weight
    }

    /// Space of the parameter blocks.
    pub fn params(&self) -> &Arc<JetSpace> {
        self.weight.space()
    }

    pub fn source_parities(&self) -> Vec<bool> {
        self.s.space().blocks()[0].odd.clone()
    }

    pub fn target_parities(&self) -> Vec<bool> {
        self.s.space().blocks()[1].odd.clone()
    }

    fn x(&self, a: usize) -> Var {
        Var { block: 0, index: a }
    }

    fn q(&self, i: usize) -> Var {
        Var { block: 1, index: i }
    }

    /// Restrict a jet on the action space to `x = q = 0`, landing in the parameter space.
    fn at_origin(&self, j: &Jet<F>) -> Jet<F> {
        let (n, m) = (self.source_parities().len(), self.target_parities().len());
        j.evaluate_block("x", &vec![F::zero(); n])
            .and_then(|j| j.evaluate_block("q", &vec![F::zero(); m]))
            .and_then(|j| j.embed(self.params()))
            .expect("action space contains x and q")
    }

    fn dl(&self, j: &Jet<F>, v: Var) -> Jet<F> {
        j.derivative(v, Side::Left).unwrap()
    }

    fn dr(&self, j: &Jet<F>, v: Var) -> Jet<F> {
        j.derivative(v, Side::Right).unwrap()
    }

    pub fn s0(&self) -> Jet<F> {
        self.at_origin(&self.s)
    }

    /// `Sₐ = ∂S/∂xᵃ` at the origin.
    pub fn s_a(&self) -> Vec<Jet<F>> {
        (0..self.source_parities().len()).map(|a| self.at_origin(&self.dl(&self.s, self.x(a)))).collect()
    }

    /// `Sⁱ`, the coefficient standing left of `qᵢ`.
    pub fn s_i(&self) -> Vec<Jet<F>> {
        (0..self.target_parities().len()).map(|i| self.at_origin(&self.dr(&self.s, self.q(i)))).collect()
    }

    /// `S_{ab} = ∂_a ∂_b S`.
    pub fn s_ab(&self) -> JetMatrix<F> {
        let n = self.source_parities().len();
        (0..n).map(|a| (0..n).map(|b| self.at_origin(&self.dl(&self.dl(&self.s, self.x(b)), self.x(a)))).collect()).collect()
    }

    /// `Sₐⁱ` in `xᵃSₐⁱqᵢ`.
    pub fn s_ai(&self) -> JetMatrix<F> {
        let (n, m) = (self.source_parities().len(), self.target_parities().len());
        (0..n).map(|a| (0..m).map(|i| self.at_origin(&self.dl(&self.dr(&self.s, self.q(i)), self.x(a)))).collect()).collect()
    }

    /// `S^{ij}` in `½S^{ij}q_jqᵢ`.
    pub fn s_ij(&self) -> JetMatrix<F> {
        let m = self.target_parities().len();
        (0..m).map(|i| (0..m).map(|j| self.at_origin(&self.dr(&self.dr(&self.s, self.q(i)), self.q(j)))).collect()).collect()
    }

    /// `c = ½ ln w`, so that the constant term is `s₀ − (ħ/i)c`.
    pub fn quantum_constant(&self) -> Result<Jet<F>> {
        Ok(self.weight.log_principal()?.scale(&F::from_ratio(1, 2)))
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G + Copy) -> QuadraticAction<G> {
        QuadraticAction { s: self.s.map_coeffs(f), weight: self.weight.map_coeffs(f) }
    }
}

/// The affine relation `p_b = xᵃP_{ab} + P_bⁱqᵢ + P_b`, `yⁱ = Yⁱₐxᵃ + Y^{ij}q_j + Yⁱ`
/// generated by a quadratic action through `p = ∂S/∂x`, `yⁱ = ∂S/∂qᵢ` (right
/// derivative). Entries are jets over the parameter space; coefficients are
/// taken with left derivatives in `x` and right derivatives in `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCanonicalRelation<F: Field> {
    pub source: Vec<bool>,
    pub target: Vec<bool>,
    pub p_x: JetMatrix<F>,
    pub p_q: JetMatrix<F>,
    pub p_c: Vec<Jet<F>>,
    pub y_x: JetMatrix<F>,
    pub y_q: JetMatrix<F>,
    pub y_c: Vec<Jet<F>>,
}

/// Coefficient matrix of the relation; the constant `s₀` is forgotten.
pub fn relation_of<F: Field>(s: &QuadraticAction<F>) -> LinearCanonicalRelation<F> {
    let (src, tgt) = (s.source_parities(), s.target_parities());
    let p: Vec<Jet<F>> = (0..src.len()).map(|b| s.dl(&s.s, s.x(b))).collect();
    let y: Vec<Jet<F>> = (0..tgt.len()).map(|i| s.dr(&s.s, s.q(i))).collect();
    let lin = |f: &Jet<F>| -> (Vec<Jet<F>>, Vec<Jet<F>>, Jet<F>) {
        (
            (0..src.len()).map(|a| s.at_origin(&s.dl(f, s.x(a)))).collect(),
            (0..tgt.len()).map(|i| s.at_origin(&s.dr(f, s.q(i)))).collect(),
            s.at_origin(f),
        )
    };
    let (mut p_x, mut p_q, mut p_c) = (vec![], vec![], vec![]);
    for pb in &p {
        let (a, b, c) = lin(pb);
        p_x.push(a);
        p_q.push(b);
        p_c.push(c);
    }
    let (mut y_x, mut y_q, mut y_c) = (vec![], vec![], vec![]);
    for yi in &y {
        let (a, b, c) = lin(yi);
        y_x.push(a);
        y_q.push(b);
        y_c.push(c);
    }
    LinearCanonicalRelation { source: src, target: tgt, p_x, p_q, p_c, y_x, y_q, y_c }
}

impl<F: Field> LinearCanonicalRelation<F> {
    /// Whether the relation is the graph of the derivatives of one quadratic
    /// function, i.e. Lagrangian for the difference symplectic form.
    pub fn is_lagrangian(&self) -> bool {
        let Some(params) = self.p_c.first().or(self.y_c.first()).map(|j| j.space().clone()) else { return true };
        let (n, m) = (self.source.len(), self.target.len());
        let s_ab: JetMatrix<F> = (0..n).map(|a| (0..n).map(|b| self.p_x[b][a].clone()).collect()).collect();
        let s_ai: JetMatrix<F> = (0..n).map(|a| (0..m).map(|i| self.y_x[i][a].clone()).collect()).collect();
        let Ok(rebuilt) = QuadraticAction::from_coefficient_jets(
            &self.source,
            &self.target,
            &params,
            &Jet::zero(&params),
            &self.p_c,
            &self.y_c,
            &s_ab,
            &s_ai,
            &self.y_q,
        ) else {
            return false;
        };
        relation_of(&rebuilt) == *self
    }
}
