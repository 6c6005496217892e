use std::sync::Arc;

use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::{solve_fixed_point, solve_newton, Jet, JetSpace, Var};

use super::pullback::target_sign;
use super::{GeneratingFunction, LAMBDA};

/// How the composition system is solved.
#[derive(Clone, Debug, PartialEq)]
pub enum ComposeMode<F> {
    /// `lambda` multiplies the terms of momentum degree ≥ 2 (inserted when
    /// absent); exact modulo `lambda^(order+1)`.
    Formal,
    /// Damped Newton on jets expanded around `(x₀, r₀)`; the result is a
    /// generating function in the shifted variables.
    Numeric { center_x: Vec<F>, center_r: Vec<F>, tol: f64 },
    /// Both actions quadratic: exact linear algebra.
    Quadratic,
}

struct Composition<F> {
    s32: Jet<F>,
    s21: Jet<F>,
    d32: Vec<Jet<F>>,
    d21: Vec<Jet<F>>,
    y_vars: Vec<Var>,
    q_vars: Vec<Var>,
    odd: Vec<bool>,
}

impl<F: Field> Composition<F> {
    /// `s32` must have its source block renamed to `y` and its momenta to `r`.
    fn new(s32: Jet<F>, s21: Jet<F>) -> Result<Self> {
        let y_vars = s32.space().vars("y")?;
        let q_vars = s21.space().vars("q")?;
        let odd = q_vars.iter().map(|&v| s21.space().is_odd(v)).collect();
        Ok(Composition {
            d32: y_vars.iter().map(|&v| s32.d(v)).collect(),
            d21: q_vars.iter().map(|&v| s21.d(v)).collect(),
            s32,
            s21,
            y_vars,
            q_vars,
            odd,
        })
    }

    fn momenta(&self, y: &[Jet<F>]) -> Result<Vec<Jet<F>>> {
        let t = y[0].space().clone();
        let a: Vec<(Var, Jet<F>)> = self.y_vars.iter().copied().zip(y.iter().cloned()).collect();
        self.d32.iter().map(|d| d.substitute(&t, &a, true)).collect()
    }

    fn positions(&self, q: &[Jet<F>]) -> Result<Vec<Jet<F>>> {
        let t = q[0].space().clone();
        let a: Vec<(Var, Jet<F>)> = self.q_vars.iter().copied().zip(q.iter().cloned()).collect();
        self.d21.iter().zip(&self.odd).map(|(d, &o)| Ok(target_sign(o, d.substitute(&t, &a, true)?))).collect()
    }

    fn step(&self, y: &[Jet<F>]) -> Result<Vec<Jet<F>>> {
        self.positions(&self.momenta(y)?)
    }

    fn value(&self, y: &[Jet<F>]) -> Result<Jet<F>> {
        let t = y[0].space().clone();
        let q = self.momenta(y)?;
        let ya: Vec<(Var, Jet<F>)> = self.y_vars.iter().copied().zip(y.iter().cloned()).collect();
        let qa: Vec<(Var, Jet<F>)> = self.q_vars.iter().copied().zip(q.iter().cloned()).collect();
        let mut s = &self.s32.substitute(&t, &ya, true)? + &self.s21.substitute(&t, &qa, true)?;
        for (yi, qi) in y.iter().zip(&q) {
            s = &s - &(yi * qi);
        }
        Ok(s)
    }
}

fn check_composable<F: Field>(s32: &GeneratingFunction<F>, s21: &GeneratingFunction<F>) -> Result<()> {
    if s21.target_parities() != s32.source_parities() {
        bail!(
            Shape,
            "target of the first morphism ({:?}) differs from the source of the second ({:?})",
            s21.target_parities(),
            s32.source_parities()
        );
    }
    Ok(())
}

/// Work space `[x, r, params…]` for the composition.
fn work_space<F: Field>(s32: &Jet<F>, s21: &Jet<F>) -> Result<Arc<JetSpace>> {
    let s21s = s21.space();
    let s32s = s32.space();
    let blocks = vec![
        (s21s.block("x").unwrap().clone(), s21s.trunc_of("x").unwrap()),
        (s32s.block("r").unwrap().clone(), s32s.trunc_of("r").unwrap()),
    ];
    JetSpace::new(blocks)?.union_with(s21s, &["q"])?.union_with(s32s, &["y"])
}

fn finish<F: Field>(s31: Jet<F>) -> Result<GeneratingFunction<F>> {
    GeneratingFunction::new(s31.rename_block("r", "q")?)
}

/// Formal composition that also returns the critical point: `S₃₁` before
/// renaming `r`, the solved `yⁱ` and `qᵢ = ∂S₃₂/∂yⁱ(y, r)`, all over the work
/// space `[x, r, lambda, params…]`. The inputs get `lambda` as in [`compose`].
pub(crate) fn compose_formal_critical<F: Field>(
    s32: &GeneratingFunction<F>,
    s21: &GeneratingFunction<F>,
    order: u32,
) -> Result<(Jet<F>, Vec<Jet<F>>, Vec<Jet<F>>)> {
    check_composable(s32, s21)?;
    let a = s32.with_lambda(order)?.s().rename_block("q", "r")?.rename_block("x", "y")?;
    let b = s21.with_lambda(order)?.s().clone();
    let w = work_space(&a, &b)?;
    let c = Composition::new(a, b)?;
    let phi: Vec<Jet<F>> = s21.phi().iter().map(|p| p.embed(&w)).collect::<Result<_>>()?;
    if phi.is_empty() {
        return Ok((&c.s32.embed(&w)? + &c.s21.embed(&w)?, vec![], vec![]));
    }
    let l = w.block_index(LAMBDA).unwrap();
    let y = solve_fixed_point(phi, l, order, |y| c.step(y))?;
    let q = c.momenta(&y)?;
    Ok((c.value(&y)?, y, q))
}

/// Generating function of `Φ₃₂ ∘ Φ₂₁`:
/// `S₃₁(x, r) = S₃₂(y, r) + S₂₁(x, q) − yⁱqᵢ` at `qᵢ = ∂S₃₂/∂yⁱ`,
/// `yⁱ = (−1)^ĩ ∂S₂₁/∂qᵢ`.
pub fn compose<F: Field>(
    s32: &GeneratingFunction<F>,
    s21: &GeneratingFunction<F>,
    order: u32,
    mode: ComposeMode<F>,
) -> Result<GeneratingFunction<F>> {
    check_composable(s32, s21)?;
    match mode {
        ComposeMode::Formal => finish(compose_formal_critical(s32, s21, order)?.0),
        ComposeMode::Numeric { center_x, center_r, tol } => {
            if s21.source_parities().iter().chain(&s21.target_parities()).chain(&s32.target_parities()).any(|&o| o) {
                bail!(Parity, "numeric mode supports even coordinates only");
            }
            let shift = |j: &Jet<F>, block: &str, center: &[F]| -> Result<Jet<F>> {
                let sp = j.space().clone();
                let vars = sp.vars(block)?;
                if vars.len() != center.len() {
                    bail!(Shape, "center for `{block}` has {} coordinates, expected {}", center.len(), vars.len());
                }
                let a: Vec<(Var, Jet<F>)> =
                    vars.iter().zip(center).map(|(&v, c)| (v, &Jet::var(&sp, v) + &Jet::constant(&sp, c.clone()))).collect();
                j.substitute(&sp, &a, true)
            };
            let a = shift(s32.s(), "q", &center_r)?.rename_block("q", "r")?.rename_block("x", "y")?;
            let b = shift(s21.s(), "x", &center_x)?;
            let w = work_space(&a, &b)?;
            let phi: Vec<Jet<F>> =
                GeneratingFunction::new(b.clone())?.phi().iter().map(|p| p.embed(&w)).collect::<Result<_>>()?;
            let c = Composition::new(a, b)?;
            if phi.is_empty() {
                return finish(&c.s32.embed(&w)? + &c.s21.embed(&w)?);
            }
            let y = solve_newton(phi, |y| c.step(y), tol, 100)?;
            finish(c.value(&y)?)
        }
        ComposeMode::Quadratic => crate::spinor::compose_generating_functions(s32, s21),
    }
}

