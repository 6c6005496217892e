use std::sync::Arc;

use super::*;
use crate::field::Rational;
use crate::jet::{Block, Jet, JetSpace};
use crate::thick_classical::{compose, pullback, ComposeMode, PullbackMode, EPS};
use crate::thick_quantum::{pullback_with_operator, quantum_pullback, OscillatoryFunction, QuantumAction, HBAR};

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn space(blocks: &[(&str, u32)]) -> Arc<JetSpace> {
    JetSpace::new(blocks.iter().map(|&(n, t)| (Block::even(n, 1), t)).collect()).unwrap()
}

/// `Σ c·Π vᵢ^eᵢ` over one-dimensional even blocks, exponents in block order.
fn poly(blocks: &[(&str, u32)], terms: &[(&[u16], Rational)]) -> Jet<Rational> {
    let sp = space(blocks);
    let mut j = Jet::zero(&sp);
    for (exps, c) in terms {
        let f: Vec<_> = exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(b, &e)| (sp.var(&blocks[b].0, 0).unwrap(), e)).collect();
        j = &j + &Jet::monomial(&sp, &f, c.clone());
    }
    j
}

fn float(j: &Jet<Rational>) -> Jet<f64> {
    j.map_coeffs(|c| num::ToPrimitive::to_f64(c).unwrap())
}

fn close(a: &Jet<f64>, b: &Jet<f64>, tol: f64) -> bool {
    let u = a.space().union_with(b.space(), &[]).unwrap();
    (&a.embed(&u).unwrap() - &b.embed(&u).unwrap()).max_abs() <= tol
}

fn free() -> Jet<Rational> {
    poly(&[("x", 2), ("p", 2)], &[(&[0, 2], r(1, 2))])
}

fn harmonic() -> Jet<Rational> {
    poly(&[("x", 2), ("p", 2)], &[(&[0, 2], r(1, 2)), (&[2, 0], r(1, 2))])
}

#[test]
fn zero_hamiltonian_leaves_functions_fixed() {
    let h = Jet::zero(&space(&[("x", 2), ("p", 2)]));
    let f0 = poly(&[("x", 4)], &[(&[2], r(1, 1)), (&[3], r(-2, 3))]);
    assert_eq!(evolve_function(&h, &f0, &r(1, 1), 3).unwrap(), f0);
}

#[test]
fn free_particle_evolves_linear_functions_exactly() {
    let f0 = poly(&[("x", 3), ("a", 3)], &[(&[1, 1], r(1, 1))]);
    let ft = evolve_function(&free(), &f0, &r(2, 1), 1).unwrap();
    let want = poly(&[("x", 3), ("a", 3)], &[(&[1, 1], r(1, 1)), (&[0, 2], r(1, 1))]);
    assert_eq!(ft, want);
}

#[test]
fn free_particle_quadratic_function_follows_the_riccati_solution() {
    // f₀ = ½bx² gives f_T = ½ b/(1 − bT) x²
    let (b, t) = (0.7, 0.5);
    let f0 = float(&poly(&[("x", 2)], &[(&[2], r(7, 20))]));
    let ft = evolve_function(&float(&free()), &f0, &t, 200).unwrap();
    let x = ft.space().var("x", 0).unwrap();
    assert!((ft.coeff(&[(x, 2)]) - 0.5 * b / (1.0 - b * t)).abs() < 1e-10);
}

#[test]
fn free_particle_action() {
    let s = evolve_action(&free(), &r(3, 1), 1, 2, 2).unwrap();
    let want = poly(&[("x", 2), ("q", 2)], &[(&[1, 1], r(1, 1)), (&[0, 2], r(3, 2))]);
    assert_eq!(s.s(), &want);
}

fn harmonic_action(t: f64) -> Jet<f64> {
    let (s, c) = t.sin_cos();
    float(&poly(&[("x", 2), ("q", 2)], &[(&[1, 1], r(1, 1))])).scale(&(1.0 / c))
        + float(&poly(&[("x", 2), ("q", 2)], &[(&[2, 0], r(1, 2)), (&[0, 2], r(1, 2))])).scale(&(s / c))
}

#[test]
fn harmonic_action_matches_the_closed_form() {
    let t = 0.4;
    let s = evolve_action(&float(&harmonic()), &t, DEFAULT_STEPS, 2, 2).unwrap();
    assert!(close(s.s(), &harmonic_action(t), 1e-10));
}

#[test]
fn harmonic_actions_form_a_group() {
    let h = float(&harmonic());
    let a = evolve_action(&h, &0.2, 400, 2, 2).unwrap();
    let b = evolve_action(&h, &0.3, 400, 2, 2).unwrap();
    let ab = compose(&a, &b, 0, ComposeMode::Quadratic).unwrap();
    assert!(close(ab.s(), &harmonic_action(0.5), 1e-10));
}

#[test]
fn numeric_action_matches_the_closed_forms() {
    let grid: Vec<Vec<f64>> = [-1.0, 0.0, 0.5].iter().map(|&v| vec![v]).collect();
    let t = 0.3;
    for (h, exact) in [
        (float(&free()), Box::new(|x: f64, q: f64| x * q + 0.5 * t * q * q) as Box<dyn Fn(f64, f64) -> f64>),
        (float(&harmonic()), Box::new(|x: f64, q: f64| harmonic_action(t).eval(&[x, q]).unwrap())),
    ] {
        for s in action_from_flow(&h, t, &grid, &grid, 200).unwrap() {
            assert!((s.s - exact(s.x[0], s.q[0])).abs() < 1e-9, "{s:?}");
        }
    }
}

#[test]
fn harmonic_flow_rotates_phase_space() {
    let pts = vec![
        PhasePoint { x: vec![1.0], p: vec![0.0] },
        PhasePoint { x: vec![0.0], p: vec![1.0] },
        PhasePoint { x: vec![0.5], p: vec![-0.5] },
    ];
    let out = hamiltonian_flow(&float(&harmonic()), &pts, 0.5, 200).unwrap();
    let (s, c) = 0.5f64.sin_cos();
    for (a, b) in pts.iter().zip(&out.points) {
        // ẏ = p, q̇ = −x
        assert!((b.x[0] - (a.x[0] * c + a.p[0] * s)).abs() < 1e-10);
        assert!((b.p[0] - (a.p[0] * c - a.x[0] * s)).abs() < 1e-10);
    }
    assert!(out.area_drift < 1e-10);
}

#[test]
fn numeric_flows_reject_bad_input() {
    let h = float(&harmonic());
    assert!(hamiltonian_flow(&h, &[], 1.0, 0).is_err());
    assert!(action_from_flow(&h, 1.0, &[vec![0.0, 1.0]], &[vec![0.0]], 10).is_err());
    let odd = JetSpace::new(vec![(Block::with_parities("x", &[true]), 2), (Block::with_parities("p", &[true]), 2)]).unwrap();
    assert!(hamiltonian_flow(&Jet::zero(&odd), &[], 1.0, 1).is_err());
}

#[test]
fn plane_wave_under_the_free_hamiltonian() {
    // w = e^{kx/hbar}: phase kx + ½k²T, amplitude 1
    let w = OscillatoryFunction::exponential("x", poly(&[("x", 3), ("k", 3)], &[(&[1, 1], r(1, 1))])).unwrap();
    let out = schrodinger_evolve(&free(), &w, &r(2, 1), 1, 2).unwrap();
    let want = poly(&[("x", 3), ("k", 3)], &[(&[1, 1], r(1, 1)), (&[0, 2], r(1, 1))]);
    assert_eq!(out.phase(), &want.embed(out.space()).unwrap());
    assert_eq!(out.amplitude(), &Jet::one(out.space()));
}

#[test]
fn free_gaussian_spreads() {
    // phase ½a/(1 − aT)x², amplitude (1 − aT)^{-1/2}
    let (a, t) = (0.5, 0.6);
    let w = OscillatoryFunction::exponential("x", float(&poly(&[("x", 4)], &[(&[2], r(1, 4))]))).unwrap();
    let out = schrodinger_evolve(&float(&free()), &w, &t, 400, 1).unwrap();
    let x = out.space().var("x", 0).unwrap();
    assert!((out.phase().coeff(&[(x, 2)]) - 0.5 * a / (1.0 - a * t)).abs() < 1e-10);
    let amp = out.amplitude();
    assert!((amp.constant_term() - (1.0 - a * t).powf(-0.5)).abs() < 1e-10);
    assert!(amp.max_abs() - amp.constant_term().abs() < 1e-10);
}

#[test]
fn schrodinger_phase_follows_hamilton_jacobi() {
    let f0 = float(&poly(&[("x", 4)], &[(&[1], r(1, 3)), (&[2], r(1, 5)), (&[3], r(-1, 4))]));
    let h = float(&harmonic());
    let w = OscillatoryFunction::exponential("x", f0.clone()).unwrap();
    let out = schrodinger_evolve(&h, &w, &0.3, 300, 1).unwrap();
    let classical = evolve_function(&h, &f0, &0.3, 300).unwrap();
    assert!(close(out.phase(), &classical, 1e-10));
}

#[test]
fn evolution_rejects_bad_input() {
    let h = free();
    let wrong = poly(&[("y", 2)], &[(&[1], r(1, 1))]);
    assert!(evolve_function(&h, &wrong, &r(1, 1), 1).is_err());
    assert!(evolve_function(&h, &poly(&[("x", 2)], &[]), &r(1, 1), 0).is_err());
    assert!(evolve_function(&poly(&[("x", 2)], &[]), &poly(&[("x", 2)], &[]), &r(1, 1), 1).is_err());
}

fn classical_family() -> (GeneratingFunction<Rational>, Jet<Rational>) {
    let s = poly(
        &[("x", 3), ("q", 3), ("t", 3)],
        &[(&[1, 1, 0], r(1, 1)), (&[0, 2, 1], r(1, 2)), (&[1, 2, 1], r(1, 1)), (&[0, 3, 2], r(-1, 3)), (&[2, 0, 1], r(2, 1))],
    );
    let g = poly(&[("y", 3), ("t", 3)], &[(&[2, 0], r(1, 1)), (&[3, 1], r(1, 1)), (&[1, 2], r(-1, 2))]);
    (GeneratingFunction::new(s).unwrap(), g)
}

#[test]
fn classical_derivation_formula_holds() {
    let (s, g) = classical_family();
    for t0 in [r(0, 1), r(1, 2), r(-1, 1)] {
        assert!(derivation_check_classical(&s, &g, &t0, 3).unwrap().is_zero());
    }
}

fn at_time(j: &Jet<Rational>, t: f64) -> Jet<f64> {
    float(j).evaluate_block(TIME, &[t]).unwrap()
}

#[test]
fn classical_derivation_matches_finite_differences() {
    let (s, g) = classical_family();
    let (t0, h) = (0.5, 1e-5);
    let pull = |t: f64| pullback(&GeneratingFunction::new(at_time(s.s(), t)).unwrap(), &at_time(&g, t), 3, PullbackMode::Formal).unwrap();
    let lhs = (&pull(t0 + h).f - &pull(t0 - h).f).scale(&(0.5 / h));

    // ∂S/∂t at q = q(x), plus eps·∂g/∂t at y = y(x)
    let base = pull(t0);
    let w = base.f.space().clone();
    let dt = |j: &Jet<Rational>| float(&j.d(j.space().var(TIME, 0).unwrap())).evaluate_block(TIME, &[t0]).unwrap();
    let hs = dt(s.s());
    let hq = hs.substitute(&w, &[(hs.space().var("q", 0).unwrap(), base.q[0].clone())], true).unwrap();
    let gt = dt(&g);
    let gy = gt.substitute(&w, &[(gt.space().var("y", 0).unwrap(), base.y[0].clone())], true).unwrap();
    let rhs = &hq + &(&Jet::var(&w, w.var(EPS, 0).unwrap()) * &gy);
    assert!(close(&lhs, &rhs, 1e-6));
}

fn quantum_family() -> (QuantumAction<Rational>, OscillatoryFunction<Rational>) {
    let b = [("x", 3), ("q", 3), ("t", 2), ("mu", 2), (HBAR, 1)];
    let s = poly(
        &b,
        &[
            (&[1, 1, 0, 0, 0], r(1, 1)),
            (&[0, 2, 0, 1, 0], r(1, 2)),
            (&[0, 2, 1, 1, 0], r(1, 3)),
            (&[1, 2, 1, 1, 0], r(1, 1)),
            (&[1, 0, 1, 0, 0], r(-1, 2)),
            (&[1, 0, 1, 0, 1], r(1, 1)),
        ],
    );
    let wb = [("y", 3), ("t", 2), ("mu", 2), (HBAR, 1)];
    let phase = poly(&wb, &[(&[2, 0, 1, 0], r(1, 1)), (&[3, 1, 1, 0], r(1, 2))]);
    let amp = poly(&wb, &[(&[0, 0, 0, 0], r(1, 1)), (&[1, 1, 0, 0], r(1, 1)), (&[2, 1, 0, 1], r(-1, 2))]);
    (QuantumAction::new(s).unwrap(), OscillatoryFunction::new("y", phase, amp).unwrap())
}

#[test]
fn quantum_derivation_formula_holds() {
    let (s, w) = quantum_family();
    for t0 in [r(0, 1), r(1, 3), r(-1, 1)] {
        assert!(derivation_check_quantum(&s, &w, &t0, 1).unwrap().is_zero());
    }
}

#[test]
fn quantum_derivation_matches_finite_differences() {
    let (s, w) = quantum_family();
    let (t0, h) = (0.25, 1e-5);
    let action = |t: f64| QuantumAction::new(at_time(s.s(), t)).unwrap();
    let func = |t: f64| OscillatoryFunction::new("y", at_time(w.phase(), t), at_time(w.amplitude(), t)).unwrap();
    let pull = |t: f64| quantum_pullback(&action(t), &func(t), 1).unwrap();
    let (plus, minus, mid) = (pull(t0 + h), pull(t0 - h), pull(t0));
    let da = (plus.amplitude() - minus.amplitude()).scale(&(0.5 / h));
    let dp = (plus.phase() - minus.phase()).scale(&(0.5 / h));
    let sp = mid.amplitude().space().clone();
    let eta = Jet::var(&sp, sp.var(HBAR, 0).unwrap());
    let lhs = &(&eta * &da.embed(&sp).unwrap()) + &(mid.amplitude() * &dp.embed(&sp).unwrap());

    // operator term from ∂S/∂t, time-derivative term from ∂w/∂t
    let dt = |j: &Jet<Rational>| float(&j.d(j.space().var(TIME, 0).unwrap())).evaluate_block(TIME, &[t0]).unwrap();
    let w0 = func(t0);
    let op = pullback_with_operator(&action(t0), &w0, 1, Some(&dt(s.s()))).unwrap();
    let wsp = w0.amplitude().space().with_trunc("y", 6).unwrap();
    let weta = Jet::var(&wsp, wsp.var(HBAR, 0).unwrap());
    let dw_amp = &(&weta * &dt(w.amplitude()).embed(&wsp).unwrap()) + &(&w0.amplitude().embed(&wsp).unwrap() * &dt(w.phase()).embed(&wsp).unwrap());
    let dw = OscillatoryFunction::new("y", w0.phase().clone(), dw_amp).unwrap();
    let moved = quantum_pullback(&action(t0), &dw, 1).unwrap();
    let rhs = op.amplitude() + &moved.amplitude().embed(op.space()).unwrap();
    let lhs = lhs.filter_block_degree(sp.block_index(HBAR).unwrap(), |d| d <= 1);
    assert!(close(&lhs, &rhs, 1e-6));
}

#[test]
fn evolution_through_a_caustic_is_a_domain_error() {
    // f₀ = 2x² focuses at T = ¼ under the free Hamiltonian
    let f0 = float(&poly(&[("x", 2)], &[(&[2], r(2, 1))]));
    assert!(matches!(evolve_function(&float(&free()), &f0, &0.3, 1000), Err(crate::error::Error::Domain(_))));
    let w = OscillatoryFunction::exponential("x", f0).unwrap();
    assert!(matches!(schrodinger_evolve(&float(&free()), &w, &0.3, 1000, 1), Err(crate::error::Error::Domain(_))));
}
