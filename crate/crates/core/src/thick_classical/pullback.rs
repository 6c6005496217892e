use std::sync::Arc;

use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::{solve_fixed_point, solve_newton, Block, Jet, JetSpace, Var};

use super::{GeneratingFunction, EPS};

/// How the stationarity system of a pullback is solved.
#[derive(Clone, Debug, PartialEq)]
pub enum PullbackMode<F> {
    /// `g` is multiplied by a formal `eps`; the result is exact modulo `eps^(order+1)`.
    Formal,
    /// Damped Newton on jets expanded around `center` in the source.
    Numeric { center: Vec<F>, tol: f64 },
}

/// Pulled-back function with the solved auxiliary series.
#[derive(Clone, Debug)]
pub struct PullbackResult<F: Field> {
    /// Formal mode: jet in `x` and `eps`; numeric mode: jet in `x − x₀`.
    pub f: Jet<F>,
    /// `yⁱ`, the perturbed map.
    pub y: Vec<Jet<F>>,
    /// `qᵢ = ∂g/∂yⁱ(y)` (times `eps` in formal mode).
    pub q: Vec<Jet<F>>,
    pub numeric: bool,
}

pub(crate) fn target_sign<F: Field>(odd: bool, j: Jet<F>) -> Jet<F> {
    if odd {
        -&j
    } else {
        j
    }
}

fn check_target<F: Field>(s: &GeneratingFunction<F>, g: &Jet<F>) -> Result<()> {
    let Some(yb) = g.space().block("y") else { bail!(Shape, "function on the target needs a `y` block") };
    if yb.odd != s.target_parities() {
        bail!(Shape, "`y` block {:?} does not match the target parities {:?}", yb.odd, s.target_parities());
    }
    if !g.is_even() {
        bail!(Parity, "only even functions can be pulled back");
    }
    Ok(())
}

/// Shared data of the stationarity system `y = ±∂S/∂q(x, ε∂g/∂y(y))`.
struct System<F> {
    s: Jet<F>,
    g: Jet<F>,
    ds: Vec<Jet<F>>,
    dg: Vec<Jet<F>>,
    q_vars: Vec<Var>,
    y_vars: Vec<Var>,
    odd: Vec<bool>,
    eps: bool,
}

impl<F: Field> System<F> {
    fn new(s: Jet<F>, g: &Jet<F>, eps: bool) -> Result<Self> {
        let q_vars = s.space().vars("q")?;
        let y_vars = g.space().vars("y")?;
        let odd = q_vars.iter().map(|&v| s.space().is_odd(v)).collect();
        Ok(System {
            ds: q_vars.iter().map(|&v| s.d(v)).collect(),
            dg: y_vars.iter().map(|&v| g.d(v)).collect(),
            s,
            g: g.clone(),
            q_vars,
            y_vars,
            odd,
            eps,
        })
    }

    fn eps_factor(&self, t: &Arc<JetSpace>, j: Jet<F>) -> Result<Jet<F>> {
        if self.eps {
            Ok(&Jet::var(t, t.var(EPS, 0)?) * &j)
        } else {
            Ok(j)
        }
    }

    fn momenta(&self, y: &[Jet<F>]) -> Result<Vec<Jet<F>>> {
        let t = y[0].space().clone();
        let assign: Vec<(Var, Jet<F>)> = self.y_vars.iter().copied().zip(y.iter().cloned()).collect();
        self.dg.iter().map(|d| self.eps_factor(&t, d.substitute(&t, &assign, true)?)).collect()
    }

    fn positions(&self, q: &[Jet<F>]) -> Result<Vec<Jet<F>>> {
        let t = q[0].space().clone();
        let assign: Vec<(Var, Jet<F>)> = self.q_vars.iter().copied().zip(q.iter().cloned()).collect();
        self.ds
            .iter()
            .zip(&self.odd)
            .map(|(d, &odd)| Ok(target_sign(odd, d.substitute(&t, &assign, true)?)))
            .collect()
    }

    fn step(&self, y: &[Jet<F>]) -> Result<Vec<Jet<F>>> {
        self.positions(&self.momenta(y)?)
    }

    /// `ε g(y) + S(x, q) − yⁱqᵢ`.
    fn value(&self, y: &[Jet<F>], q: &[Jet<F>]) -> Result<Jet<F>> {
        let t = y[0].space().clone();
        let gy: Vec<(Var, Jet<F>)> = self.y_vars.iter().copied().zip(y.iter().cloned()).collect();
        let sq: Vec<(Var, Jet<F>)> = self.q_vars.iter().copied().zip(q.iter().cloned()).collect();
        let mut f = &self.eps_factor(&t, self.g.substitute(&t, &gy, true)?)? + &self.s.substitute(&t, &sq, true)?;
        for (yi, qi) in y.iter().zip(q) {
            f = &f - &(yi * qi);
        }
        Ok(f)
    }
}

fn formal_space<F: Field>(s: &GeneratingFunction<F>, g: &Jet<F>, order: u32) -> Result<Arc<JetSpace>> {
    let x = s.space().block("x").unwrap().clone();
    let mut blocks = vec![(x, s.space().trunc_of("x").unwrap()), (Block::even(EPS, 1), order)];
    blocks.extend(s.space().other_blocks(&["x", "q", EPS]));
    JetSpace::new(blocks)?.union_with(g.space(), &["y", "x", "q", EPS])
}

fn solve_formal<F: Field>(s: &GeneratingFunction<F>, g: &Jet<F>, order: u32) -> Result<(System<F>, Vec<Jet<F>>)> {
    check_target(s, g)?;
    let w = formal_space(s, g, order)?;
    let sys = System::new(s.s().clone(), g, true)?;
    let phi: Vec<Jet<F>> = s.phi().iter().map(|p| p.embed(&w)).collect::<Result<_>>()?;
    if phi.is_empty() {
        return Ok((sys, phi));
    }
    let eps_block = w.block_index(EPS).unwrap();
    let y = solve_fixed_point(phi, eps_block, order, |y| sys.step(y))?;
    Ok((sys, y))
}

/// Pullback `f = g(y) + S(x, q) − yⁱqᵢ` with `qᵢ = ∂g/∂yⁱ(y)`, `yⁱ = (−1)^ĩ ∂S/∂qᵢ(x, q)`.
///
/// In formal mode `g` is replaced by `eps·g`, which makes the system
/// contractive; the pullback proper is the value at `eps = 1` whenever that
/// series converges. The generating function and `g` are used as the
/// polynomials they store.
pub fn pullback<F: Field>(s: &GeneratingFunction<F>, g: &Jet<F>, order: u32, mode: PullbackMode<F>) -> Result<PullbackResult<F>> {
    match mode {
        PullbackMode::Formal => {
            let (sys, y) = solve_formal(s, g, order)?;
            let w = formal_space(s, g, order)?;
            if y.is_empty() {
                let eps = Jet::var(&w, w.var(EPS, 0)?);
                let f = &s.s().embed(&w)? + &(&eps * &g.embed(&w)?);
                return Ok(PullbackResult { f, y, q: vec![], numeric: false });
            }
            let q = sys.momenta(&y)?;
            let f = sys.value(&y, &q)?;
            Ok(PullbackResult { f, y, q, numeric: false })
        }
        PullbackMode::Numeric { center, tol } => {
            check_target(s, g)?;
            let space = s.space();
            let xs = space.vars("x")?;
            if center.len() != xs.len() {
                bail!(Shape, "center has {} coordinates, source dimension is {}", center.len(), xs.len());
            }
            if xs.iter().any(|&v| space.is_odd(v)) || s.target_parities().iter().any(|&o| o) {
                bail!(Parity, "numeric mode supports even coordinates only");
            }
            let shift: Vec<(Var, Jet<F>)> =
                xs.iter().zip(&center).map(|(&v, c)| (v, &Jet::var(space, v) + &Jet::constant(space, c.clone()))).collect();
            let shifted = GeneratingFunction::new(s.s().substitute(space, &shift, true)?)?;
            let w = shifted.space().without_block("q")?.union_with(g.space(), &["y", "x", "q"])?;
            let sys = System::new(shifted.s().clone(), g, false)?;
            let phi: Vec<Jet<F>> = shifted.phi().iter().map(|p| p.embed(&w)).collect::<Result<_>>()?;
            if phi.is_empty() {
                return Ok(PullbackResult { f: &shifted.s0().embed(&w)? + &g.embed(&w)?, y: phi, q: vec![], numeric: true });
            }
            let y = solve_newton(phi, |y| sys.step(y), tol, 100)?;
            let q = sys.momenta(&y)?;
            let f = sys.value(&y, &q)?;
            Ok(PullbackResult { f, y, q, numeric: true })
        }
    }
}

/// The perturbed map `φ_g(x) = φ(x) + ε S^{ij}(x) ∂ᵢg(φ(x)) + …` through `eps^order`.
pub fn perturbed_map<F: Field>(s: &GeneratingFunction<F>, g: &Jet<F>, order: u32) -> Result<Vec<Jet<F>>> {
    Ok(solve_formal(s, g, order)?.1)
}

/// `d/dτ|₀ Φ*[g + τδg] − φ_g*(δg)`, as a jet in `x` and `eps` (with `eps`
/// multiplying both `g` and `δg`).
pub fn derivative_check<F: Field>(s: &GeneratingFunction<F>, g: &Jet<F>, dg: &Jet<F>, order: u32) -> Result<Jet<F>> {
    const TAU: &str = "__tau";
    check_target(s, dg)?;
    let gspace = g.space().union_with(dg.space(), &[])?;
    let tspace = gspace.with_block(Block::even(TAU, 1), 1)?;
    let tau = Jet::var(&tspace, tspace.var(TAU, 0)?);
    let g_tau = &g.embed(&tspace)? + &(&tau * &dg.embed(&tspace)?);
    let f = pullback(s, &g_tau, order, PullbackMode::Formal)?.f;
    let tv = f.space().var(TAU, 0)?;
    let df = f.coefficient_of_power(tv, 1).evaluate_block(TAU, &[F::zero()])?;

    let g0 = g.embed(&gspace)?;
    let y = perturbed_map(s, &g0, order)?;
    let w = df.space().clone();
    let ys = dg.space().vars("y")?;
    let assign: Vec<(Var, Jet<F>)> = ys.into_iter().zip(y.iter().map(|j| j.embed(&w)).collect::<Result<Vec<_>>>()?).collect();
    let eps = Jet::var(&w, w.var(EPS, 0)?);
    Ok(&df - &(&eps * &dg.substitute(&w, &assign, true)?))
}

/// `H₁(x, ∂S/∂x) − H₂((−1)^ĩ ∂S/∂q, q)` as a jet over the space of `S`
/// extended by any parameter blocks of the Hamiltonians.
pub fn hamilton_jacobi_residual<F: Field>(s: &GeneratingFunction<F>, h1: &Jet<F>, h2: &Jet<F>) -> Result<Jet<F>> {
    for (h, pos, mom, dim) in [(h1, "x", "p", s.n1()), (h2, "y", "q", s.n2())] {
        for b in [pos, mom] {
            if h.space().block(b).map(|blk| blk.dim) != Some(dim) {
                bail!(Shape, "Hamiltonian needs a block `{b}` of dimension {dim}, got {}", h.space());
            }
        }
    }
    let t = s.space().union_with(h1.space(), &["x", "p"])?.union_with(h2.space(), &["y", "q"])?;
    let sj = s.s().embed(&t)?;
    let xs = s.space().vars("x")?;
    let qs = s.space().vars("q")?;
    let p_assign: Vec<(Var, Jet<F>)> =
        h1.space().vars("p")?.into_iter().zip(&xs).map(|(p, &x)| (p, sj.d(t.var("x", x.index).unwrap()))).collect();
    let y_assign: Vec<(Var, Jet<F>)> = h2
        .space()
        .vars("y")?
        .into_iter()
        .zip(&qs)
        .map(|(y, &q)| (y, target_sign(s.space().is_odd(q), sj.d(t.var("q", q.index).unwrap()))))
        .collect();
    Ok(&h1.substitute(&t, &p_assign, true)? - &h2.substitute(&t, &y_assign, true)?)
}
