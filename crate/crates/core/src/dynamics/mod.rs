//! One-parameter families: Hamilton–Jacobi evolution of functions and of
//! generating functions, the action integral along the Hamiltonian flow,
//! Schrödinger evolution of oscillatory wave functions and the derivation
//! formulas for families of pullbacks.
//!
//! Hamiltonians are jets over blocks `x`, `p` (plus parameters, and `hbar`
//! for quantum generators). Evolution uses classical RK4 with a fixed number
//! of steps on the jet coefficients.

mod derivation;
mod flow;

pub use derivation::{derivation_check_classical, derivation_check_quantum, TIME};
pub use flow::{action_from_flow, hamiltonian_flow, FlowSample, HamiltonianFlowState, PhasePoint};

use std::sync::Arc;

use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::{Jet, JetSpace, Var};
use crate::thick_classical::GeneratingFunction;
use crate::thick_quantum::{momentum_groups, Conjugation, OscillatoryFunction, HBAR};

/// Default RK4 step count for `T ≤ 1`.
pub const DEFAULT_STEPS: u32 = 1000;

fn check_hamiltonian<F: Field>(h: &Jet<F>) -> Result<(Vec<bool>, Arc<JetSpace>)> {
    let space = h.space();
    let (Some(xb), Some(pb)) = (space.block("x"), space.block("p")) else {
        bail!(Shape, "Hamiltonian needs blocks `x` and `p`, got {space}");
    };
    if xb.odd != pb.odd {
        bail!(Shape, "`x` and `p` blocks of the Hamiltonian must match");
    }
    if !h.is_even() {
        bail!(Parity, "Hamiltonian must be even");
    }
    Ok((xb.odd.clone(), space.clone()))
}

/// One RK4 step for a vector of jets.
fn rk4_step<F: Field>(u: &[Jet<F>], dt: &F, rhs: &mut impl FnMut(&[Jet<F>]) -> Result<Vec<Jet<F>>>) -> Result<Vec<Jet<F>>> {
    let half = dt.clone() * F::from_ratio(1, 2);
    let axpy = |a: &[Jet<F>], k: &[Jet<F>], c: &F| -> Vec<Jet<F>> { a.iter().zip(k).map(|(x, y)| x + &y.scale(c)).collect() };
    let k1 = rhs(u)?;
    let k2 = rhs(&axpy(u, &k1, &half))?;
    let k3 = rhs(&axpy(u, &k2, &half))?;
    let k4 = rhs(&axpy(u, &k3, dt))?;
    let sixth = dt.clone() * F::from_ratio(1, 6);
    let third = dt.clone() * F::from_ratio(1, 3);
    Ok(u
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let s = &(&k1[i].scale(&sixth) + &k2[i].scale(&third)) + &(&k3[i].scale(&third) + &k4[i].scale(&sixth));
            x + &s
        })
        .collect())
}

fn integrate<F: Field>(
    u0: Vec<Jet<F>>,
    t: &F,
    steps: u32,
    mut rhs: impl FnMut(&[Jet<F>]) -> Result<Vec<Jet<F>>>,
) -> Result<Vec<Jet<F>>> {
    if steps < 1 {
        bail!(Domain, "at least one integration step is required");
    }
    let dt = t.clone() * F::from_ratio(1, i64::from(steps));
    let mut u = u0;
    for n in 1..=steps {
        u = rk4_step(&u, &dt, &mut rhs)?;
        if !u.iter().all(Jet::is_finite) {
            bail!(Domain, "solution is not finite after step {n} of {steps}; the evolution reaches a singularity");
        }
    }
    Ok(u)
}

/// `f_T` solving `∂f/∂t = H(x, ∂f/∂x)` from `f₀`, a jet over `x` and
/// parameters; the result lives on the union of the parameter blocks.
pub fn evolve_function<F: Field>(h: &Jet<F>, f0: &Jet<F>, t: &F, steps: u32) -> Result<Jet<F>> {
    let (par, _) = check_hamiltonian(h)?;
    if f0.space().block("x").map(|b| &b.odd) != Some(&par) {
        bail!(Shape, "function needs an `x` block matching the Hamiltonian");
    }
    if !f0.is_even() {
        bail!(Parity, "function must be even");
    }
    let space = f0.space().union_with(h.space(), &["x", "p"])?;
    let xs = space.vars("x")?;
    let ps = h.space().vars("p")?;
    let out = integrate(vec![f0.embed(&space)?], t, steps, |u| {
        let f = &u[0];
        let assign: Vec<(Var, Jet<F>)> = ps.iter().zip(&xs).map(|(&p, &x)| (p, f.d(x))).collect();
        Ok(vec![h.substitute(&space, &assign, true)?])
    })?;
    Ok(out.into_iter().next().unwrap())
}

/// `S_T` solving `∂S/∂t = H((−1)^q̃ ∂S/∂q, q)` from `S₀ = xᵃqₐ`, with the given
/// bounds for `x` and `q`.
pub fn evolve_action<F: Field>(h: &Jet<F>, t: &F, steps: u32, x_trunc: u32, q_trunc: u32) -> Result<GeneratingFunction<F>> {
    let (par, _) = check_hamiltonian(h)?;
    let id = GeneratingFunction::<F>::identity_super(&par, x_trunc, q_trunc)?;
    let space = id.space().union_with(h.space(), &["x", "p"])?;
    let qs = space.vars("q")?;
    let ps = h.space().vars("p")?;
    let hx = h.space().vars("x")?;
    let out = integrate(vec![id.s().embed(&space)?], t, steps, |u| {
        let s = &u[0];
        let mut assign: Vec<(Var, Jet<F>)> = hx
            .iter()
            .zip(&qs)
            .map(|(&x, &q)| {
                let d = s.d(q);
                (x, if space.is_odd(q) { -&d } else { d })
            })
            .collect();
        assign.extend(ps.iter().zip(&qs).map(|(&p, &q)| (p, Jet::var(&space, q))));
        Ok(vec![h.substitute(&space, &assign, true)?])
    })?;
    GeneratingFunction::new(out.into_iter().next().unwrap())
}

/// Evolution of `w = A e^{f/hbar}` (variable block `x`) under
/// `(ħ/i)∂w/∂t = Ĥw`, where `Ĥ = H(x, (ħ/i)∂)` with every `x` to the left.
///
/// The phase follows `∂f/∂t = H₀(x, ∂f)` with `H₀` the `hbar⁰` part of the
/// symbol; the amplitude follows `∂A/∂t = (H(x, D)A − H₀(x, ∂f)A)/hbar` with
/// `D = ∂f + hbar∂`. Both are truncated at `hbar^hbar_order`.
pub fn schrodinger_evolve<F: Field>(
    h: &Jet<F>,
    w0: &OscillatoryFunction<F>,
    t: &F,
    steps: u32,
    hbar_order: u32,
) -> Result<OscillatoryFunction<F>> {
    let (par, _) = check_hamiltonian(h)?;
    if w0.var() != "x" || w0.space().block("x").map(|b| &b.odd) != Some(&par) {
        bail!(Shape, "wave function needs a variable block `x` matching the Hamiltonian");
    }
    if par.iter().any(|&o| o) {
        bail!(Parity, "Schrödinger evolution supports even coordinates only");
    }
    let k = hbar_order;
    let work = w0.space().with_trunc(HBAR, k + 1)?.union_with(h.space(), &["x", "p"])?;
    let eta = work.var(HBAR, 0)?;
    let hb = eta.block;
    let groups = momentum_groups(h, "p", &work)?;
    let groups0: Vec<(Vec<u16>, Jet<F>)> = groups.iter().map(|(a, c)| (a.clone(), c.coefficient_of_power(eta, 0))).collect();
    let xs = work.vars("x")?;
    let classical = |f: &Jet<F>| -> Jet<F> {
        let df: Vec<Jet<F>> = xs.iter().map(|&v| f.d(v)).collect();
        let mut acc = Jet::zero(&work);
        for (alpha, c) in &groups0 {
            let mut t = c.clone();
            for (d, &e) in df.iter().zip(alpha) {
                t = &t * &d.pow(u32::from(e));
            }
            acc = &acc + &t;
        }
        acc
    };
    let u0 = vec![w0.phase().embed(&work)?, w0.amplitude().embed(&work)?];
    let out = integrate(u0, t, steps, |u| {
        let (f, a) = (&u[0], &u[1]);
        let p0 = classical(f);
        let conj = Conjugation::new(f, &xs, &work)?;
        let r = &conj.apply(&groups, a) - &(&p0 * a);
        // the hbar⁰ part cancels; dropping it keeps floating-point residue out of the division
        let r = r.filter_block_degree(hb, |d| d >= 1);
        Ok(vec![p0, r.divide_by_var(eta)?.filter_block_degree(hb, |d| d <= k)])
    })?;
    let fin = work.with_trunc(HBAR, k)?;
    OscillatoryFunction::new("x", out[0].embed(&fin)?, out[1].embed(&fin)?)
}

#[cfg(test)]
mod tests;
