use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::field::Rational;
use crate::jet::{Block, Jet, JetSpace, Var};
use crate::spinor::{compose_classical, QuadraticAction};

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn xq_space(x: u32, q: u32) -> Arc<JetSpace> {
    JetSpace::new(vec![(Block::even("x", 1), x), (Block::even("q", 1), q)]).unwrap()
}

fn y_space(t: u32) -> Arc<JetSpace> {
    JetSpace::new(vec![(Block::even("y", 1), t)]).unwrap()
}

/// `Σ c·xᵃqᵇ` on a 1-d space.
fn poly(sp: &Arc<JetSpace>, terms: &[(u16, u16, Rational)]) -> Jet<Rational> {
    let mut j = Jet::zero(sp);
    for (a, b, c) in terms {
        let mut f = vec![];
        if *a > 0 {
            f.push((Var { block: 0, index: 0 }, *a));
        }
        if *b > 0 {
            f.push((Var { block: 1, index: 0 }, *b));
        }
        j = &j + &Jet::monomial(sp, &f, c.clone());
    }
    j
}

fn g_poly(terms: &[(u16, Rational)]) -> Jet<Rational> {
    let sp = y_space(4);
    let mut j = Jet::zero(&sp);
    for (a, c) in terms {
        j = &j + &Jet::monomial(&sp, &[(Var { block: 0, index: 0 }, *a)], c.clone());
    }
    j
}

/// `eps · g(x)` over the space of `f`.
fn eps_times(g: &Jet<Rational>, f: &Jet<Rational>) -> Jet<Rational> {
    let sp = f.space().clone();
    let eps = Jet::var(&sp, sp.var(EPS, 0).unwrap());
    &eps * &g.rename_block("y", "x").unwrap().embed(&sp).unwrap()
}

#[test]
fn identity_is_xq() {
    let id = GeneratingFunction::<Rational>::identity(1, 3).unwrap();
    let sp = id.space().clone();
    assert_eq!(id.s(), &poly(&sp, &[(1, 1, r(1, 1))]));
    assert_eq!(id.phi().len(), 1);
    assert!(id.s_plus().is_zero());
}

#[test]
fn pullback_through_identity_is_the_identity() {
    let id = GeneratingFunction::<Rational>::identity(1, 4).unwrap();
    let g = g_poly(&[(0, r(2, 1)), (2, r(1, 3)), (3, r(-1, 1))]);
    let f = pullback(&id, &g, 3, PullbackMode::Formal).unwrap().f;
    assert_eq!(f, eps_times(&g, &f));
}

#[test]
fn pullback_along_a_map_is_composition() {
    let sx = JetSpace::new(vec![(Block::even("x", 1), 4)]).unwrap();
    let x = Jet::var(&sx, Var { block: 0, index: 0 });
    let s = GeneratingFunction::from_map(&[x.scale(&r(2, 1))], &[false], 4).unwrap();
    let g = g_poly(&[(2, r(1, 1))]);
    let f = pullback(&s, &g, 2, PullbackMode::Formal).unwrap().f;
    let four_x2 = poly(&xq_space(4, 1), &[(2, 0, r(4, 1))]).evaluate_block("q", &[r(0, 1)]).unwrap();
    assert_eq!(f, eps_times(&four_x2.rename_block("x", "y").unwrap(), &f));

    // S = S⁰(x) + φ(x)q: f = S⁰ + eps·g(φ(x)), checked against direct substitution
    let sp = xq_space(4, 3);
    let s = GeneratingFunction::new(poly(&sp, &[(2, 0, r(1, 2)), (1, 1, r(3, 1)), (2, 1, r(-1, 1))])).unwrap();
    let g = g_poly(&[(1, r(1, 1)), (2, r(2, 3))]);
    let f = pullback(&s, &g, 3, PullbackMode::Formal).unwrap().f;
    let w = f.space().clone();
    let phi = s.phi()[0].embed(&w).unwrap();
    let gphi = g.substitute(&w, &[(Var { block: 0, index: 0 }, phi)], true).unwrap();
    let eps = Jet::var(&w, w.var(EPS, 0).unwrap());
    assert_eq!(f, &s.s0().embed(&w).unwrap() + &(&eps * &gphi));
}

#[test]
fn from_map_checks_parity_and_shape() {
    let sx = JetSpace::new(vec![(Block::even("x", 1), 2)]).unwrap();
    let x = Jet::<Rational>::var(&sx, Var { block: 0, index: 0 });
    assert!(matches!(GeneratingFunction::from_map(&[x.clone()], &[true], 2), Err(crate::error::Error::Parity(_))));
    assert!(matches!(GeneratingFunction::from_map(&[x], &[false, false], 2), Err(crate::error::Error::Shape(_))));
}

/// Hand-rolled ε-series arithmetic: coefficients of `eps^k`, truncated at `n`.
fn series_mul(a: &[Rational], b: &[Rational], n: usize) -> Vec<Rational> {
    let mut out = vec![r(0, 1); n + 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            if i + j <= n {
                out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
            }
        }
    }
    out
}

#[test]
fn quadratic_pullback_matches_hand_iteration() {
    // S = xq + ½sq², g = ½ay²; everything is x times (or x² times) a series in eps
    let (s, a) = (r(2, 3), r(-3, 2));
    let n = 3;
    let gf = GeneratingFunction::new(poly(&xq_space(2, 2), &[(1, 1, r(1, 1)), (0, 2, s.clone() / r(2, 1))])).unwrap();
    let g = g_poly(&[(2, a.clone() / r(2, 1))]);
    let res = pullback(&gf, &g, n, PullbackMode::Formal).unwrap();

    // y = x·Y, q = eps·a·y = x·Q, Y ← 1 + s·Q
    let eps = |c: Rational| {
        let mut v = vec![r(0, 1); n as usize + 1];
        v[1] = c;
        v
    };
    let mut y = vec![r(1, 1), r(0, 1), r(0, 1), r(0, 1)];
    for _ in 0..=n {
        let q = series_mul(&eps(a.clone()), &y, n as usize);
        y = q.iter().map(|c| c.clone() * s.clone()).collect();
        y[0] = y[0].clone() + r(1, 1);
    }
    let q = series_mul(&eps(a.clone()), &y, n as usize);
    // f/x² = eps·a/2·Y² + Q + s/2·Q² − Y·Q
    let yy = series_mul(&y, &y, n as usize);
    let qq = series_mul(&q, &q, n as usize);
    let yq = series_mul(&y, &q, n as usize);
    let ayy = series_mul(&eps(a.clone() / r(2, 1)), &yy, n as usize);
    let f: Vec<Rational> = (0..=n as usize).map(|k| ayy[k].clone() + q[k].clone() + s.clone() / r(2, 1) * qq[k].clone() - yq[k].clone()).collect();

    let w = res.f.space().clone();
    let xv = w.var("x", 0).unwrap();
    let ev = w.var(EPS, 0).unwrap();
    for k in 0..=n as usize {
        let mono = |p: u16| if k == 0 { vec![(xv, p)] } else { vec![(xv, p), (ev, k as u16)] };
        assert_eq!(res.f.coeff(&mono(2)), f[k], "eps^{k}");
        assert_eq!(res.y[0].coeff(&mono(1)), y[k], "perturbed map at eps^{k}");
    }
}

#[test]
fn perturbed_map_orders() {
    let s = GeneratingFunction::new(poly(&xq_space(3, 3), &[(1, 1, r(1, 1)), (2, 1, r(1, 2)), (1, 2, r(1, 1))])).unwrap();
    // g = 0 gives φ
    let phi = perturbed_map(&s, &g_poly(&[]), 2).unwrap();
    let w = phi[0].space().clone();
    assert_eq!(phi[0], s.phi()[0].embed(&w).unwrap());
    // first order: S^{11}(x)·g'(φ(x)) with S^{11} = 2x, g = y²/2
    let g = g_poly(&[(2, r(1, 2))]);
    let y = perturbed_map(&s, &g, 2).unwrap().remove(0);
    let w = y.space().clone();
    let ev = w.var(EPS, 0).unwrap();
    let first = y.coefficient_of_power(ev, 1).evaluate_block(EPS, &[r(0, 1)]).unwrap();
    let phi = s.phi()[0].clone();
    let s11 = s.s().d(s.space().var("q", 0).unwrap()).d(s.space().var("q", 0).unwrap()).evaluate_block("q", &[r(0, 1)]).unwrap();
    assert_eq!(first.embed(phi.space()).unwrap(), &s11 * &phi);
}

#[test]
fn compose_maps_and_identities() {
    let sx = JetSpace::new(vec![(Block::even("x", 1), 4)]).unwrap();
    let x = Jet::var(&sx, Var { block: 0, index: 0 });
    let phi = &x + &x.pow(2);
    let psi = x.scale(&r(3, 1));
    let s21 = GeneratingFunction::from_map(&[phi.clone()], &[false], 4).unwrap();
    let s32 = GeneratingFunction::from_map(&[psi], &[false], 4).unwrap();
    let c = compose(&s32, &s21, 3, ComposeMode::Formal).unwrap();
    let expected = GeneratingFunction::from_map(&[phi.scale(&r(3, 1))], &[false], 4).unwrap();
    assert_eq!(c.s(), &expected.s().embed(c.space()).unwrap());

    let s = GeneratingFunction::new(poly(&xq_space(3, 3), &[(0, 1, r(1, 2)), (1, 1, r(1, 1)), (2, 1, r(1, 1)), (0, 2, r(1, 3)), (1, 2, r(-1, 1))])).unwrap();
    let id = GeneratingFunction::identity(1, 3).unwrap();
    let graded = s.with_lambda(3).unwrap();
    for c in [compose(&id, &s, 3, ComposeMode::Formal).unwrap(), compose(&s, &id, 3, ComposeMode::Formal).unwrap()] {
        assert_eq!(c.s(), &graded.s().embed(c.space()).unwrap());
    }
    let idc = compose(&id, &id, 2, ComposeMode::Formal).unwrap();
    assert_eq!(idc.s(), &id.s().embed(idc.space()).unwrap());
}

#[test]
fn quadratic_composition_agrees_with_formal_mode() {
    let (t, s) = (r(1, 3), r(2, 5));
    let s21 = GeneratingFunction::new(poly(&xq_space(2, 2), &[(1, 1, r(1, 1)), (0, 2, s.clone() / r(2, 1))])).unwrap();
    let s32 = GeneratingFunction::new(poly(&xq_space(2, 2), &[(1, 1, r(1, 1)), (2, 0, t.clone() / r(2, 1))])).unwrap();
    let order = 5;
    let formal = compose(&s32, &s21, order, ComposeMode::Formal).unwrap();
    // the exact composite with λ inserted, expanded by the linear-algebra route
    let exact = compose(&s32, &s21.with_lambda(order).unwrap(), order, ComposeMode::Quadratic).unwrap();
    assert_eq!(formal.s(), &exact.s().embed(formal.space()).unwrap());
    // and without λ: the closed form with denominator 1 − ts
    let q = compose(&s32, &s21, 0, ComposeMode::Quadratic).unwrap();
    let d = r(1, 1) - t.clone() * s.clone();
    let sp = q.space().clone();
    let expected = poly(&sp, &[(2, 0, t.clone() / (r(2, 1) * d.clone())), (1, 1, r(1, 1) / d.clone()), (0, 2, s.clone() / (r(2, 1) * d.clone()))]);
    assert_eq!(q.s(), &expected);
    let via_spinor =
        compose_classical(&QuadraticAction::from_generating_function(&s32).unwrap(), &QuadraticAction::from_generating_function(&s21).unwrap()).unwrap();
    assert_eq!(q.s(), &via_spinor.s().embed(&sp).unwrap());
}

#[test]
fn numeric_composition_matches_formal() {
    let s21 = GeneratingFunction::new(poly(&xq_space(3, 3), &[(1, 1, r(1, 1)), (0, 2, r(1, 5)), (2, 1, r(1, 4))])).unwrap();
    let s32 = GeneratingFunction::new(poly(&xq_space(3, 3), &[(1, 1, r(1, 1)), (2, 0, r(1, 3))])).unwrap();
    let formal = compose(&s32, &s21, 12, ComposeMode::Formal).unwrap();
    let at_one = formal.s().evaluate_block(LAMBDA, &[r(1, 1)]).unwrap().map_coeffs(|c| num::ToPrimitive::to_f64(c).unwrap());
    let (a, b) = (s32.map_coeffs(|c| num::ToPrimitive::to_f64(c).unwrap()), s21.map_coeffs(|c| num::ToPrimitive::to_f64(c).unwrap()));
    let numeric = compose(&a, &b, 0, ComposeMode::Numeric { center_x: vec![0.0], center_r: vec![0.0], tol: 1e-12 }).unwrap();
    let diff = &numeric.s().embed(at_one.space()).unwrap() - &at_one;
    assert!(diff.max_abs() < 1e-4, "{diff}");
}

#[test]
fn derivative_formula() {
    let id = GeneratingFunction::<Rational>::identity(1, 4).unwrap();
    let g = g_poly(&[(2, r(1, 2)), (3, r(1, 1))]);
    let dg = g_poly(&[(1, r(1, 1)), (2, r(-2, 1))]);
    assert!(derivative_check(&id, &g, &dg, 3).unwrap().is_zero());
    let s = GeneratingFunction::new(poly(&xq_space(4, 3), &[(1, 1, r(1, 1)), (0, 2, r(1, 3)), (1, 2, r(1, 2)), (0, 3, r(1, 5))])).unwrap();
    assert!(derivative_check(&s, &g, &dg, 3).unwrap().is_zero());
}

#[test]
fn derivative_matches_finite_difference() {
    // numeric mode: d/dτ Φ*[g + τδg](x₀) by a symmetric difference
    let s = GeneratingFunction::new(poly(&xq_space(2, 2), &[(1, 1, r(1, 1)), (0, 2, r(1, 4))]))
        .unwrap()
        .map_coeffs(|c| num::ToPrimitive::to_f64(c).unwrap());
    let to_f = |j: Jet<Rational>| j.map_coeffs(|c| num::ToPrimitive::to_f64(c).unwrap());
    let g = to_f(g_poly(&[(2, r(1, 2)), (3, r(1, 10))]));
    let dg = to_f(g_poly(&[(1, r(1, 1)), (2, r(1, 3))]));
    let x0 = 0.4;
    let value = |tau: f64| {
        let gt = &g + &dg.scale(&tau);
        pullback(&s, &gt, 0, PullbackMode::Numeric { center: vec![x0], tol: 1e-14 }).unwrap()
    };
    let h = 1e-6;
    let fd = (value(h).f.constant_term() - value(-h).f.constant_term()) / (2.0 * h);
    let y = value(0.0).y[0].constant_term();
    let exact = dg.eval(&[y]).unwrap();
    assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
}

#[test]
fn hamilton_jacobi_residuals() {
    let hx = JetSpace::new(vec![(Block::even("x", 1), 3), (Block::even("p", 1), 3)]).unwrap();
    let hy = JetSpace::new(vec![(Block::even("y", 1), 3), (Block::even("q", 1), 3)]).unwrap();
    let ham = |sp: &Arc<JetSpace>, c: [i64; 3]| {
        let (a, b) = (Jet::var(sp, Var { block: 0, index: 0 }), Jet::var(sp, Var { block: 1, index: 0 }));
        &(&a.scale(&r(c[0], 1)) + &(&b * &b).scale(&r(c[1], 1))) + &(&a * &b).scale(&r(c[2], 1))
    };
    let id = GeneratingFunction::<Rational>::identity(1, 3).unwrap();
    assert!(hamilton_jacobi_residual(&id, &ham(&hx, [1, 2, 3]), &ham(&hy, [1, 2, 3])).unwrap().is_zero());
    assert!(!hamilton_jacobi_residual(&id, &ham(&hx, [1, 2, 3]), &ham(&hy, [1, 2, 4])).unwrap().is_zero());
}

#[test]
fn json_round_trip() {
    let s = GeneratingFunction::new(poly(&xq_space(3, 3), &[(1, 1, r(1, 1)), (0, 2, r(1, 3))])).unwrap();
    let v = s.to_json();
    assert_eq!(v["n1"], 1);
    assert_eq!(GeneratingFunction::<Rational>::from_json(&v).unwrap(), s);
    let mut bad = v.clone();
    bad["n2"] = 3.into();
    assert!(matches!(GeneratingFunction::<Rational>::from_json(&bad), Err(crate::error::Error::Parse(_))));
}

/// Random 1-d generating function without q-free terms and with φ(0) = 0.
fn random_gf(c: &[i64]) -> GeneratingFunction<Rational> {
    let mut terms = vec![(1, 1, r(1 + c[0].abs(), 2))];
    let mut k = 1;
    for (a, b) in [(2u16, 1u16), (0, 2), (1, 2), (0, 3)] {
        terms.push((a, b, r(c[k], 4)));
        k += 1;
    }
    GeneratingFunction::new(poly(&xq_space(4, 3), &terms)).unwrap()
}

fn filter_total(j: &Jet<Rational>, blocks: &[&str], max: u32) -> Jet<Rational> {
    let sp = j.space().clone();
    let ids: Vec<usize> = blocks.iter().filter_map(|b| sp.block_index(b)).collect();
    j.filter_terms(|vars| vars.iter().filter(|(v, _)| ids.contains(&v.block)).map(|(_, e)| u32::from(*e)).sum::<u32>() <= max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn composition_is_associative(a in prop::collection::vec(-3i64..=3, 5), b in prop::collection::vec(-3i64..=3, 5), c in prop::collection::vec(-3i64..=3, 5)) {
        let n = 2;
        let (u, t, s) = (random_gf(&a).with_lambda(n).unwrap(), random_gf(&b).with_lambda(n).unwrap(), random_gf(&c).with_lambda(n).unwrap());
        let lhs = compose(&compose(&u, &t, n, ComposeMode::Formal).unwrap(), &s, n, ComposeMode::Formal).unwrap();
        let rhs = compose(&u, &compose(&t, &s, n, ComposeMode::Formal).unwrap(), n, ComposeMode::Formal).unwrap();
        // intermediate composites drop yᵏr terms with k > 4, which feed back at total degree ≥ 6
        prop_assert_eq!(filter_total(lhs.s(), &["x", "q"], 5), filter_total(&rhs.s().embed(lhs.space()).unwrap(), &["x", "q"], 5));
    }

    #[test]
    fn pullback_is_functorial(a in prop::collection::vec(-3i64..=3, 5), b in prop::collection::vec(-3i64..=3, 5), g in prop::collection::vec(-3i64..=3, 2)) {
        let n = 2;
        let (s32, s21) = (random_gf(&a).with_lambda(n).unwrap(), random_gf(&b).with_lambda(n).unwrap());
        // g = μ·(g₁y + g₂y²) with a grading parameter μ
        let gs = JetSpace::new(vec![(Block::even("y", 1), 4), (Block::even("mu", 1), n)]).unwrap();
        let y = Jet::var(&gs, Var { block: 0, index: 0 });
        let mu = Jet::var(&gs, Var { block: 1, index: 0 });
        let gj = &mu * &(&y.scale(&r(g[0], 2)) + &(&y * &y).scale(&r(g[1], 3)));
        let at_one = |f: Jet<Rational>| f.evaluate_block(EPS, &[r(1, 1)]).unwrap();
        let s31 = compose(&s32, &s21, n, ComposeMode::Formal).unwrap();
        let lhs = at_one(pullback(&s31, &gj, n, PullbackMode::Formal).unwrap().f);
        let f1 = at_one(pullback(&s32, &gj, n, PullbackMode::Formal).unwrap().f).rename_block("x", "y").unwrap();
        let rhs = at_one(pullback(&s21, &f1, n, PullbackMode::Formal).unwrap().f);
        let rhs = rhs.embed(lhs.space()).unwrap();
        prop_assert_eq!(filter_total(&lhs, &["x", "mu"], 3), filter_total(&rhs, &["x", "mu"], 3));
    }
}
