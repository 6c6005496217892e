use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::{Block, Jet, Var};
use crate::thick_classical::{pullback, GeneratingFunction, PullbackMode, EPS};
use crate::thick_quantum::{pullback_with_operator, quantum_pullback, OscillatoryFunction, QuantumAction, HBAR};

/// Name of the time block of a family.
pub const TIME: &str = "t";
const DT: &str = "__dt";

/// `j(t₀ + dt)` with `dt` a new block of bound 1 (the time block is removed).
fn shift<F: Field>(j: &Jet<F>, t0: &F) -> Result<Jet<F>> {
    let sp = j.space();
    let Some(tb) = sp.block(TIME) else { bail!(Shape, "family needs a time block `{TIME}`, got {sp}") };
    if tb.dim != 1 || tb.odd[0] {
        bail!(Shape, "time block must be a single even variable");
    }
    let target = sp.with_block(Block::even(DT, 1), 1)?.without_block(TIME)?;
    let t = sp.var(TIME, 0)?;
    let moved = &Jet::constant(&target, t0.clone()) + &Jet::var(&target, target.var(DT, 0)?);
    j.substitute(&target, &[(t, moved)], true)
}

/// Value and first derivative at `dt = 0`, both without the `dt` block.
fn split<F: Field>(j: &Jet<F>) -> Result<(Jet<F>, Jet<F>)> {
    let dt = j.space().var(DT, 0)?;
    Ok((j.coefficient_of_power(dt, 0).evaluate_block(DT, &[F::zero()])?, j.coefficient_of_power(dt, 1).evaluate_block(DT, &[F::zero()])?))
}

/// Time-independent families still get a time block, so that both inputs can be shifted.
fn with_time<F: Field>(j: &Jet<F>) -> Result<Jet<F>> {
    if j.space().block(TIME).is_some() {
        Ok(j.clone())
    } else {
        j.embed(&j.space().with_block(Block::even(TIME, 1), 1)?)
    }
}

/// `d/dt Φ_t*[g_t] − H_t(x, φ*_{g_t}(∂g_t/∂y)) − φ*_{g_t}(∂g_t/∂t)` at `t = t₀`,
/// with `H_t = ∂S_t/∂t`, in formal mode (`g` multiplied by `eps`) through
/// `eps^order`. The families carry a time block `t`; the residual is a jet in
/// `x`, `eps` and the remaining parameters.
pub fn derivation_check_classical<F: Field>(s_t: &GeneratingFunction<F>, g_t: &Jet<F>, t0: &F, order: u32) -> Result<Jet<F>> {
    let s = GeneratingFunction::new(shift(&with_time(s_t.s())?, t0)?)?;
    let g = shift(&with_time(g_t)?, t0)?;
    let lhs = pullback(&s, &g, order, PullbackMode::Formal)?;
    let (_, df) = split(&lhs.f)?;

    let (s0, h_t) = split(s.s())?;
    let (g0, dg) = split(&g)?;
    let base = pullback(&GeneratingFunction::new(s0)?, &g0, order, PullbackMode::Formal)?;
    let w = df.space().clone();
    let qs = h_t.space().vars("q")?;
    let q_assign: Vec<(Var, Jet<F>)> = qs.into_iter().zip(base.q.iter().map(|j| j.embed(&w)).collect::<Result<Vec<_>>>()?).collect();
    let ys = dg.space().vars("y")?;
    let y_assign: Vec<(Var, Jet<F>)> = ys.into_iter().zip(base.y.iter().map(|j| j.embed(&w)).collect::<Result<Vec<_>>>()?).collect();
    let eps = Jet::var(&w, w.var(EPS, 0)?);
    let rhs = &h_t.substitute(&w, &q_assign, true)? + &(&eps * &dg.substitute(&w, &y_assign, true)?);
    Ok(&df - &rhs)
}

/// `(ħ/i) d/dt Φ̂_t*[w_t] − (Ĥ_t F̂*)(w_t) − (ħ/i)Φ̂_t*[∂w_t/∂t]` at `t = t₀`
/// through `hbar^hbar_order`, where `Ĥ_t F̂*` inserts `H_t(x, hbar∂_y)` before
/// setting `y = φ(x)`. Every term has the phase of `Φ̂_t*[w_t₀]`; the residual
/// is the difference of amplitudes.
pub fn derivation_check_quantum<F: Field>(
    s_t: &QuantumAction<F>,
    w_t: &OscillatoryFunction<F>,
    t0: &F,
    hbar_order: u32,
) -> Result<Jet<F>> {
    let s = QuantumAction::new(shift(&with_time(s_t.s())?, t0)?)?;
    let wp = shift(&with_time(w_t.phase())?, t0)?;
    let wa = shift(&with_time(w_t.amplitude())?, t0)?;
    let w = OscillatoryFunction::new(w_t.var(), wp.clone(), wa.clone())?;
    let moving = quantum_pullback(&s, &w, hbar_order)?;
    let (p0, dp) = split(moving.phase())?;
    let (a0, da) = split(moving.amplitude())?;
    let space = a0.space().clone();
    let eta = Jet::var(&space, space.var(HBAR, 0)?);
    let lhs = &(&eta * &da) + &(&a0 * &dp.embed(&space)?);

    let (s0, h_t) = split(s.s())?;
    let s0 = QuantumAction::new(s0)?;
    let (f_w, df_w) = split(&wp)?;
    let (a_w, da_w) = split(&wa)?;
    let w0 = OscillatoryFunction::new(w_t.var(), f_w.clone(), a_w.clone())?;
    let inserted = pullback_with_operator(&s0, &w0, hbar_order, Some(&h_t))?;
    // room for the full product A·∂f/∂t in the target variable
    let var = w_t.var();
    let wsp = a_w.space().with_trunc(var, a_w.space().trunc_of(var).unwrap_or(0) + df_w.space().trunc_of(var).unwrap_or(0))?;
    let a_w = a_w.embed(&wsp)?;
    let weta = Jet::var(&wsp, wsp.var(HBAR, 0)?);
    let dw = OscillatoryFunction::new(w_t.var(), f_w, &(&weta * &da_w.embed(&wsp)?) + &(&a_w * &df_w.embed(&wsp)?))?;
    let moved = quantum_pullback(&s0, &dw, hbar_order)?;
    for (name, other) in [("operator term", &inserted), ("time-derivative term", &moved)] {
        if !same_phase(&p0, other.phase())? {
            bail!(Internal, "{name} has a different phase");
        }
    }
    let rhs = &inserted.amplitude().embed(&space)? + &moved.amplitude().embed(&space)?;
    Ok(&lhs - &rhs)
}

fn same_phase<F: Field>(a: &Jet<F>, b: &Jet<F>) -> Result<bool> {
    let u = a.space().union_with(b.space(), &[])?;
    Ok(a.embed(&u)? == b.embed(&u)?)
}
