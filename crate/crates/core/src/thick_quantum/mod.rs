//! Quantum thick morphisms: actions `S(x, q; ħ)`, oscillatory wave functions
//! `A·e^{(i/ħ)f}`, the quantum pullback in operator form, the classical limit
//! and composition through first order in `ħ`.
//!
//! The formal parameter is the block `hbar`, which stands for `ħ/i`; with it
//! every formula has rational coefficients. An oscillatory function
//! `A e^{f/hbar}` keeps an `hbar`-free phase and puts all `hbar` corrections
//! into the amplitude.

mod operator;

pub(crate) use operator::{momentum_groups, Conjugation};

use std::sync::Arc;

use serde_json::Value;

use crate::error::{bail, Error, Result};
use crate::field::Field;
use crate::jet::json::{jet_from_json, jet_to_json, JsonCoeff};
use crate::jet::{Block, Jet, JetSpace, Side, Var};
use crate::spinor::QuadraticAction;
use crate::super_linear::SuperMatrix;
use crate::thick_classical::{compose_formal_critical, GeneratingFunction};

/// Name of the formal parameter `ħ/i`.
pub const HBAR: &str = "hbar";
/// Default order in `hbar`.
pub const DEFAULT_HBAR_ORDER: u32 = 2;

const TAU: &str = "__tau";
/// Effectively no bound: the terminating flow keeps every `y`-degree finite.
const Y_UNBOUNDED: u32 = 4096;
/// Bound on the number of nested flow integrals in a pullback.
const FLOW_STEPS: u32 = 32;

fn check_hbar(space: &JetSpace) -> Result<()> {
    if let Some(b) = space.block(HBAR) {
        if b.dim != 1 || b.odd[0] {
            bail!(Shape, "`{HBAR}` must be a single even variable");
        }
    }
    Ok(())
}

fn hbar_var(space: &JetSpace) -> Option<Var> {
    space.var(HBAR, 0).ok()
}

/// Coefficient of `hbar^k` as a jet without the `hbar` block.
fn hbar_coefficient<F: Field>(j: &Jet<F>, k: u16) -> Result<Jet<F>> {
    match hbar_var(j.space()) {
        Some(h) => j.coefficient_of_power(h, k).evaluate_block(HBAR, &[F::zero()]),
        None if k == 0 => Ok(j.clone()),
        None => Ok(Jet::zero(j.space())),
    }
}

/// Quantum generating function `S(x, q; ħ)`: a jet with blocks `x`, `q`,
/// optionally `hbar`, and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumAction<F: Field> {
    s: Jet<F>,
}

impl<F: Field> QuantumAction<F> {
    pub fn new(s: Jet<F>) -> Result<Self> {
        check_hbar(s.space())?;
        GeneratingFunction::new(s.clone())?;
        Ok(QuantumAction { s })
    }

    /// An `hbar`-free action on a space extended by `hbar` up to `hbar_order`.
    pub fn from_classical(g: &GeneratingFunction<F>, hbar_order: u32) -> Result<Self> {
        let s = match g.space().block(HBAR) {
            Some(_) => g.s().clone(),
            None => g.s().embed(&g.space().with_block(Block::even(HBAR, 1), hbar_order)?)?,
        };
        Self::new(s)
    }

    /// `S − hbar·c` with `c = ½ ln w` the constant of a quadratic action.
    pub fn from_quadratic(a: &QuadraticAction<F>, hbar_order: u32) -> Result<Self> {
        let base = Self::from_classical(&a.to_generating_function()?, hbar_order)?;
        let space = base.space().clone();
        let eta = Jet::var(&space, hbar_var(&space).unwrap());
        let c = a.quantum_constant()?.embed(&space)?;
        Self::new(&base.s - &(&eta * &c))
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

    /// Coefficient of `hbar^k`, a jet without the `hbar` block.
    pub fn hbar_coefficient(&self, k: u16) -> Result<Jet<F>> {
        hbar_coefficient(&self.s, k)
    }

    /// The action at `ħ = 0`.
    pub fn classical_limit(&self) -> Result<GeneratingFunction<F>> {
        GeneratingFunction::new(self.hbar_coefficient(0)?)
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> QuantumAction<G> {
        QuantumAction { s: self.s.map_coeffs(f) }
    }
}

impl<F: JsonCoeff> QuantumAction<F> {
    /// Jet JSON with `n1` and `n2`, like a generating function.
    pub fn to_json(&self) -> Value {
        let mut v = jet_to_json(&self.s);
        if let Value::Object(o) = &mut v {
            o.insert("n1".into(), self.n1().into());
            o.insert("n2".into(), self.n2().into());
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let g = GeneratingFunction::<F>::from_json(v)?;
        Self::new(g.s().clone()).map_err(|e| match e {
            Error::Parity(m) => Error::Parity(m),
            other => Error::Parse(other.to_string()),
        })
    }
}

/// Classical limit of a quantum action.
pub fn classical_limit<F: Field>(s: &QuantumAction<F>) -> Result<GeneratingFunction<F>> {
    s.classical_limit()
}

/// Wave function `A·e^{f/hbar}` in the variables of the block `var`.
///
/// Phase and amplitude share one space containing `var` and `hbar`; the phase
/// has no `hbar` terms.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatoryFunction<F: Field> {
    var: String,
    phase: Jet<F>,
    amplitude: Jet<F>,
}

impl<F: Field> OscillatoryFunction<F> {
    /// Normalizes the split: `hbar` terms of the phase are exponentiated into
    /// the amplitude. An `hbar` block is added (bound [`DEFAULT_HBAR_ORDER`])
    /// when neither jet has one.
    pub fn new(var: &str, phase: Jet<F>, amplitude: Jet<F>) -> Result<Self> {
        let mut space = phase.space().union_widened(amplitude.space())?;
        if space.block(var).is_none() {
            bail!(Shape, "wave function needs a block `{var}`, got {space}");
        }
        if space.block(HBAR).is_none() {
            space = space.with_block(Block::even(HBAR, 1), DEFAULT_HBAR_ORDER)?;
        }
        check_hbar(&space)?;
        if !phase.is_even() || !amplitude.is_even() {
            bail!(Parity, "phase and amplitude must be even");
        }
        let phase = phase.embed(&space)?;
        let amplitude = amplitude.embed(&space)?;
        let h = hbar_var(&space).unwrap();
        let p0 = phase.coefficient_of_power(h, 0);
        let extra = (&phase - &p0).divide_by_var(h)?;
        let amplitude = if extra.is_zero() { amplitude } else { &amplitude * &extra.exp()? };
        Ok(OscillatoryFunction { var: var.to_string(), phase: p0, amplitude })
    }

    /// `e^{f/hbar}` with unit amplitude.
    pub fn exponential(var: &str, phase: Jet<F>) -> Result<Self> {
        let one = Jet::one(phase.space());
        Self::new(var, phase, one)
    }

    /// Amplitude only (zero phase).
    pub fn from_amplitude(var: &str, amplitude: Jet<F>) -> Result<Self> {
        let zero = Jet::zero(amplitude.space());
        Self::new(var, zero, amplitude)
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn phase(&self) -> &Jet<F> {
        &self.phase
    }

    pub fn amplitude(&self) -> &Jet<F> {
        &self.amplitude
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.phase.space()
    }

    pub fn hbar_order(&self) -> u32 {
        self.space().trunc_of(HBAR).unwrap()
    }

    /// Same function with its variable block renamed.
    pub fn with_var(&self, to: &str) -> Result<Self> {
        Ok(OscillatoryFunction {
            var: to.to_string(),
            phase: self.phase.rename_block(&self.var, to)?,
            amplitude: self.amplitude.rename_block(&self.var, to)?,
        })
    }

    /// Same function over a larger space.
    pub fn embed(&self, space: &Arc<JetSpace>) -> Result<Self> {
        Ok(OscillatoryFunction { var: self.var.clone(), phase: self.phase.embed(space)?, amplitude: self.amplitude.embed(space)? })
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> OscillatoryFunction<G> {
        OscillatoryFunction { var: self.var.clone(), phase: self.phase.map_coeffs(&f), amplitude: self.amplitude.map_coeffs(&f) }
    }
}

impl<F: JsonCoeff> OscillatoryFunction<F> {
    /// `{"var": name, "phase": jet, "amplitude": jet}`; a missing amplitude is 1.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "var": self.var,
            "phase": jet_to_json(&self.phase),
            "amplitude": jet_to_json(&self.amplitude),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let Some(var) = v.get("var").and_then(Value::as_str) else { bail!(Parse, "wave function needs a string `var`") };
        let Some(phase) = v.get("phase") else { bail!(Parse, "wave function needs a `phase`") };
        let phase: Jet<F> = jet_from_json(phase)?;
        let amplitude = match v.get("amplitude") {
            Some(a) => jet_from_json(a)?,
            None => Jet::one(phase.space()),
        };
        Self::new(var, phase, amplitude).map_err(|e| match e {
            Error::Parity(m) => Error::Parity(m),
            other => Error::Parse(other.to_string()),
        })
    }
}

/// Apply the operator `H(pos, hbar·∂)` (positions to the left) to `w`, where
/// `h` has the block of `w`'s variables and a momentum block `mom`.
pub fn apply_operator<F: Field>(h: &Jet<F>, mom: &str, w: &OscillatoryFunction<F>) -> Result<OscillatoryFunction<F>> {
    let var = w.var();
    let (Some(pb), Some(mb)) = (h.space().block(var), h.space().block(mom)) else {
        bail!(Shape, "operator needs blocks `{var}` and `{mom}`, got {}", h.space());
    };
    if pb.odd != w.space().block(var).unwrap().odd || mb.odd != pb.odd {
        bail!(Shape, "operator blocks do not match the wave function");
    }
    if pb.odd.iter().any(|&o| o) {
        bail!(Parity, "operators act on even coordinates only");
    }
    check_hbar(h.space())?;
    let space = w.space().union_with(h.space(), &[mom])?;
    let w = w.embed(&space)?;
    let groups = momentum_groups(h, mom, &space)?;
    let conj = Conjugation::new(w.phase(), &space.vars(var)?, &space)?;
    let amplitude = conj.apply(&groups, w.amplitude());
    Ok(OscillatoryFunction { var: var.to_string(), phase: w.phase, amplitude })
}

fn even_only(parities: &[bool], what: &str) -> Result<()> {
    if parities.iter().any(|&o| o) {
        bail!(Parity, "quantum pullback supports even {what} only");
    }
    Ok(())
}

/// Quantum pullback `e^{S⁰/hbar}[exp(S⁺(x, hbar∂_y)/hbar) w](φ(x))` through
/// `hbar^hbar_order`.
///
/// The exponential is the time-one flow of `∂_τ w = S⁺(x, hbar∂)w/hbar`,
/// solved by Picard iteration on the phase (`∂_τ f = S⁺(x, ∂f)` at `hbar = 0`)
/// and on the amplitude. The flow must terminate in finitely many nested
/// integrals, which holds when every term of `S⁺` or of the phase carries a
/// formal grading parameter; otherwise the result is a non-contractive error.
/// Functions are treated as the polynomials they store; intermediate
/// products are not truncated in `y`, since derivatives lower the degree.
pub fn quantum_pullback<F: Field>(s: &QuantumAction<F>, w: &OscillatoryFunction<F>, hbar_order: u32) -> Result<OscillatoryFunction<F>> {
    pullback_with_operator(s, w, hbar_order, None)
}

/// Quantum pullback with the operator `op(x, hbar∂_y)` (a symbol over the
/// blocks `x`, `q` of the action) applied after the exponential and before
/// setting `y = φ(x)`.
pub fn pullback_with_operator<F: Field>(
    s: &QuantumAction<F>,
    w: &OscillatoryFunction<F>,
    hbar_order: u32,
    op: Option<&Jet<F>>,
) -> Result<OscillatoryFunction<F>> {
    if w.var() != "y" {
        bail!(Shape, "wave function on the target must use the block `y`, got `{}`", w.var());
    }
    let ss = s.space();
    let ws = w.space();
    let yb = ws.block("y").unwrap();
    if yb.dim != s.n2() {
        bail!(Shape, "wave function has {} variables, target dimension is {}", yb.dim, s.n2());
    }
    even_only(&s.source_parities(), "sources")?;
    even_only(&s.target_parities(), "targets")?;
    let tx = ss.trunc_of("x").unwrap();
    let k = hbar_order;
    let work = JetSpace::new(vec![
        (ss.block("x").unwrap().clone(), tx),
        (yb.clone(), Y_UNBOUNDED),
        (Block::even(HBAR, 1), k + 1),
        (Block::even(TAU, 1), FLOW_STEPS),
    ])?
    .union_with(ss, &["q"])?
    .union_with(ws, &[])?;
    let work = match op {
        Some(h) => work.union_with(h.space(), &["q"])?,
        None => work,
    };
    let tau = work.var(TAU, 0)?;
    let eta = work.var(HBAR, 0)?;
    let hb = work.block_index(HBAR).unwrap();
    let q_block = ss.block_index("q").unwrap();

    let s_plus = s.s().filter_block_degree(q_block, |d| d >= 2);
    let groups = momentum_groups(&s_plus, "q", &work)?;
    let groups0: Vec<(Vec<u16>, Jet<F>)> = groups.iter().map(|(a, c)| (a.clone(), c.coefficient_of_power(eta, 0))).collect();
    let ys = work.vars("y")?;

    let f0 = w.phase().embed(&work)?;
    let a0 = w.amplitude().embed(&work)?;
    let classical = |f: &Jet<F>| -> Jet<F> {
        let df: Vec<Jet<F>> = ys.iter().map(|&v| f.d(v)).collect();
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
    let f = flow(&f0, tau, |f| Ok(classical(f)))?;
    let p0 = classical(&f);
    let conj = Conjugation::new(&f, &ys, &work)?;
    let a = flow(&a0, tau, |a| {
        let r = &conj.apply(&groups, a) - &(&p0 * a);
        Ok(r.divide_by_var(eta)?.filter_block_degree(hb, |d| d <= k))
    })?;
    let f1 = f.evaluate_block(TAU, &[F::one()])?;
    let mut a1 = a.evaluate_block(TAU, &[F::one()])?;
    if let Some(h) = op {
        let sp = a1.space().clone();
        let groups = momentum_groups(h, "q", &sp)?;
        a1 = Conjugation::new(&f1, &sp.vars("y")?, &sp)?.apply(&groups, &a1);
    }

    let out = f1.space().without_block("y")?;
    let qs = ss.vars("q")?;
    let at_zero = |j: &Jet<F>| j.evaluate_block("q", &vec![F::zero(); qs.len()]);
    let assign: Vec<(Var, Jet<F>)> = f1
        .space()
        .vars("y")?
        .into_iter()
        .zip(&qs)
        .map(|(y, &q)| Ok((y, at_zero(&s.s().d(q))?.embed(&out)?)))
        .collect::<Result<_>>()?;
    let total = &f1.substitute(&out, &assign, true)? + &at_zero(s.s())?.embed(&out)?;
    let h = out.var(HBAR, 0)?;
    let phase = total.coefficient_of_power(h, 0);
    let extra = (&total - &phase).divide_by_var(h)?;
    let amplitude = &a1.substitute(&out, &assign, true)? * &extra.exp()?;
    let fin = out.with_trunc(HBAR, k)?;
    OscillatoryFunction::new("x", phase.embed(&fin)?, amplitude.embed(&fin)?)
}

/// Picard iteration `u = u₀ + ∫₀^τ rhs(u)`; errors when the `τ`-series
/// reaches its bound.
fn flow<F: Field>(u0: &Jet<F>, tau: Var, mut rhs: impl FnMut(&Jet<F>) -> Result<Jet<F>>) -> Result<Jet<F>> {
    let mut u = u0.clone();
    for _ in 0..=FLOW_STEPS + 1 {
        let next = u0 + &rhs(&u)?.integrate(tau)?;
        if next == u {
            if !u.coefficient_of_power(tau, FLOW_STEPS as u16).is_zero() {
                break;
            }
            return Ok(u);
        }
        u = next;
    }
    bail!(NonContractive, "the pullback flow does not terminate; grade the action or the phase by a formal parameter")
}

/// Composite quantum action through `ħ¹`:
/// `S₃₁ = S₃₁^class + hbar·(S₃₂⁽¹⁾ + S₂₁⁽¹⁾ − ½ ln Ber N)` at the critical
/// point, where `S⁽¹⁾` are the `hbar`-linear parts and
/// `N_ij = δ_ij − T_ik S^{kj}(−1)^k̃` is the normalized Hessian built from the
/// position Hessian `T` of `S₃₂` and the momentum Hessian of `S₂₁`.
///
/// The classical part is the formal composition graded by `lambda` (see
/// [`crate::thick_classical::compose`]); the result has `hbar` bound 1.
pub fn quantum_compose_first_order<F: Field>(s32: &QuantumAction<F>, s21: &QuantumAction<F>, order: u32) -> Result<QuantumAction<F>> {
    let c32 = s32.classical_limit()?;
    let c21 = s21.classical_limit()?;
    let (s31, y, q) = compose_formal_critical(&c32, &c21, order)?;
    let work = s31.space().clone();
    let a = c32.with_lambda(order)?.s().rename_block("q", "r")?.rename_block("x", "y")?;
    let b = c21.with_lambda(order)?.s().clone();
    let ya: Vec<(Var, Jet<F>)> = a.space().vars("y")?.into_iter().zip(y.iter().cloned()).collect();
    let qa: Vec<(Var, Jet<F>)> = b.space().vars("q")?.into_iter().zip(q.iter().cloned()).collect();

    let h32 = hbar_coefficient(s32.s(), 1)?.rename_block("q", "r")?.rename_block("x", "y")?;
    let h21 = hbar_coefficient(s21.s(), 1)?;
    let mut first = &h32.substitute(&work, &ya, true)? + &h21.substitute(&work, &qa, true)?;

    let mid = c21.target_parities();
    let n = mid.len();
    if n > 0 {
        let yv = a.space().vars("y")?;
        let qv = b.space().vars("q")?;
        let t: Vec<Vec<Jet<F>>> = (0..n)
            .map(|i| (0..n).map(|k| a.d(yv[k]).d(yv[i]).substitute(&work, &ya, true)).collect())
            .collect::<Result<_>>()?;
        let sm: Vec<Vec<Jet<F>>> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| b.derivative(qv[k], Side::Right)?.derivative(qv[j], Side::Right)?.substitute(&work, &qa, true))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let rows: Vec<Vec<Jet<F>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = if i == j { Jet::one(&work) } else { Jet::zero(&work) };
                        for k in 0..n {
                            let p = &t[i][k] * &sm[k][j];
                            acc = if mid[k] { &acc + &p } else { &acc - &p };
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let ber = SuperMatrix::new_even(mid.clone(), mid, rows)?.berezinian()?;
        let c = ber.log_principal()?.scale(&F::from_ratio(1, 2));
        first = &first - &c;
    }
    let space = work.with_block(Block::even(HBAR, 1), 1)?;
    let eta = Jet::var(&space, space.var(HBAR, 0)?);
    let s = &s31.embed(&space)? + &(&eta * &first.embed(&space)?);
    QuantumAction::new(s.rename_block("r", "q")?)
}
