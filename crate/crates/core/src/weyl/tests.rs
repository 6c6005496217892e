use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::field::Rational;

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

type W = WeylElement<Rational>;

fn mono(par: &[bool], x: &[u16], p: &[u16], h: u32, c: Rational) -> W {
    W::monomial(par, x, p, h, c).unwrap()
}

#[test]
fn heisenberg_relation() {
    let par = [false];
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    assert_eq!(&p * &x, &mono(&par, &[1], &[1], 0, r(1, 1)) + &W::hbar(&par));
    assert_eq!(&x * &x, mono(&par, &[2], &[0], 0, r(1, 1)));
    let xp = &x * &p;
    assert_eq!(&xp * &xp, &mono(&par, &[2], &[2], 0, r(1, 1)) + &mono(&par, &[1], &[1], 1, r(1, 1)));
}

#[test]
fn odd_pair_is_a_clifford_relation() {
    let par = [true];
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    assert_eq!(&p * &x, &(-&mono(&par, &[1], &[1], 0, r(1, 1))) + &W::hbar(&par));
    assert!((&x * &x).is_zero());
    assert!((&p * &p).is_zero());
    assert_eq!(quantum_poisson(&p, &x).unwrap(), W::one(&par));
    assert_eq!(quantum_poisson(&x, &p).unwrap(), W::one(&par));
}

#[test]
fn bracket_examples() {
    let par = [false];
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    assert_eq!(quantum_poisson(&p, &x).unwrap(), W::one(&par));
    let x2 = &x * &x;
    let p2 = &p * &p;
    let b = quantum_poisson(&x2, &p2).unwrap();
    let sp = b.symbol_space(2).unwrap();
    let xs = Jet::var(&sp, sp.var("x", 0).unwrap());
    let ps = Jet::var(&sp, sp.var("p", 0).unwrap());
    let classical = poisson_bracket(&(&xs * &xs), &(&ps * &ps)).unwrap();
    assert!(same(&b.principal_symbol(), &classical));
    assert_eq!(classical.coeff(&[(classical.space().var("x", 0).unwrap(), 1), (classical.space().var("p", 0).unwrap(), 1)]), r(-4, 1));
    let a = &x2 + &(&x * &p);
    assert!(quantum_poisson(&a, &a).unwrap().is_zero());
}

fn same(a: &Jet<Rational>, b: &Jet<Rational>) -> bool {
    let mut u = a.space().union_with(b.space(), &[]).unwrap();
    for blk in u.blocks().to_vec() {
        let t = a.space().trunc_of(&blk.name).unwrap_or(0).max(b.space().trunc_of(&blk.name).unwrap_or(0));
        u = u.with_trunc(&blk.name, t).unwrap();
    }
    a.embed(&u).unwrap() == b.embed(&u).unwrap()
}

fn hamiltonian(par: &[bool], c: &[i64]) -> Jet<Rational> {
    let sp = JetSpace::new(vec![(Block::with_parities("x", par), 2), (Block::with_parities("p", par), 2)]).unwrap();
    let vars: Vec<Var> = sp.vars("x").unwrap().into_iter().chain(sp.vars("p").unwrap()).collect();
    let mut h = Jet::constant(&sp, r(c[0], 2));
    let mut k = 1;
    for (i, &v) in vars.iter().enumerate() {
        if !sp.is_odd(v) {
            h = &h + &Jet::monomial(&sp, &[(v, 1)], r(c[k % c.len()], 1));
        }
        k += 1;
        for &w in &vars[i..] {
            if sp.is_odd(v) == sp.is_odd(w) && !(v == w && sp.is_odd(v)) {
                h = &h + &Jet::monomial(&sp, &[(v, 1), (w, 1)], r(c[k % c.len()], 2));
            }
            k += 1;
        }
    }
    h
}

#[test]
fn quantization_examples() {
    let par = [false];
    let sp = JetSpace::new(vec![(Block::even("x", 1), 2), (Block::even("p", 1), 2)]).unwrap();
    let px = Jet::monomial(&sp, &[(sp.var("x", 0).unwrap(), 1), (sp.var("p", 0).unwrap(), 1)], r(1, 1));
    let xp_hat = mono(&par, &[1], &[1], 0, r(1, 1));
    assert_eq!(quantize_s(&px, &r(0, 1)).unwrap(), xp_hat);
    assert_eq!(quantize_s(&px, &r(1, 2)).unwrap(), &xp_hat + &mono(&par, &[0], &[0], 1, r(1, 2)));
    // symmetric ordering by hand: ½(p̂x̂ + x̂p̂)
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    assert_eq!(quantize_s(&px, &r(1, 2)).unwrap(), (&(&p * &x) + &(&x * &p)).scale(&r(1, 2)));
    let cubic = &px * &Jet::var(&sp, sp.var("x", 0).unwrap());
    assert!(matches!(quantize_s(&cubic, &r(0, 1)), Err(crate::error::Error::Domain(_))));
}

#[test]
fn odd_pair_weyl_ordering() {
    let par = [true];
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    let sp = JetSpace::new(vec![(Block::with_parities("x", &par), 2), (Block::with_parities("p", &par), 2)]).unwrap();
    let xp = Jet::monomial(&sp, &[(sp.var("x", 0).unwrap(), 1), (sp.var("p", 0).unwrap(), 1)], r(1, 1));
    // Q_½(xp) = ½(x̂p̂ − p̂x̂) for an odd pair
    assert_eq!(quantize_s(&xp, &r(1, 2)).unwrap(), (&(&x * &p) - &(&p * &x)).scale(&r(1, 2)));
}

#[test]
fn cocycle_examples() {
    let sp = JetSpace::new(vec![(Block::even("x", 1), 2), (Block::even("p", 1), 2)]).unwrap();
    let x = Jet::var(&sp, sp.var("x", 0).unwrap());
    let p = Jet::var(&sp, sp.var("p", 0).unwrap());
    let h1 = (&x * &x).scale(&r(1, 2));
    let h2 = (&p * &p).scale(&r(1, 2));
    // brute force: (i/ħ)[½x̂², ½p̂²] − Q₀({½x², ½p²})
    let par = [false];
    let (xh, ph) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    let a = (&xh * &xh).scale(&r(1, 2));
    let b = (&ph * &ph).scale(&r(1, 2));
    let comm = &(&a * &b) - &(&b * &a);
    let lowered: Rational = comm.terms().filter(|t| t.0 == [0] && t.1 == [0]).map(|t| t.3.clone()).sum();
    assert_eq!(lowered, r(-1, 2));
    assert_eq!(cocycle_defect(&h1, &h2, &r(0, 1)).unwrap(), r(-1, 2));
    assert_eq!(cocycle_defect(&h1, &h2, &r(1, 2)).unwrap(), r(0, 1));
    assert_eq!(ordering_defect(&h1, &h2, &r(1, 3)).unwrap(), r(-1, 6));
    assert_eq!(cocycle_defect(&x, &p, &r(1, 5)).unwrap(), r(0, 1));
}

#[test]
fn adjoint_examples() {
    let par = [false];
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    let m = adjoint_on_l(&(&x * &p)).unwrap();
    assert_eq!(m, vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(-1, 1)]]);
    assert_eq!(adjoint_on_l(&(&x + &p)).unwrap(), vec![vec![r(0, 1); 2]; 2]);
    let rot = (&(&x * &x) + &(&p * &p)).scale(&r(1, 2));
    let m = adjoint_on_l(&rot).unwrap();
    assert_eq!(m, vec![vec![r(0, 1), r(-1, 1)], vec![r(1, 1), r(0, 1)]]);
    let cubic = &(&x * &x) * &x;
    assert!(matches!(adjoint_on_l(&cubic), Err(crate::error::Error::Domain(_))));
    assert!(matches!(adjoint_on_l(&W::x(&[true], 0).unwrap()), Err(crate::error::Error::Parity(_))));
}

#[test]
fn rotation_generator_exponentiates_to_an_orthogonal_symplectic_matrix() {
    let par = [false];
    let (x, p) = (W::x(&par, 0).unwrap(), W::p(&par, 0).unwrap());
    let m = adjoint_on_l(&(&(&x * &x) + &(&p * &p)).scale(&r(1, 2))).unwrap();
    let m: Vec<Vec<f64>> = m.iter().map(|row| row.iter().map(|c| num::ToPrimitive::to_f64(c).unwrap()).collect()).collect();
    let t = 0.7;
    // exp(tM) by series
    let mut e = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = e;
    for k in 1..40 {
        let mut next = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = (0..2).map(|l| term[i][l] * m[l][j]).sum::<f64>() * t / k as f64;
            }
        }
        term = next;
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] += term[i][j];
            }
        }
    }
    let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
    assert!((det - 1.0).abs() < 1e-12);
    let ete = (e[0][0] * e[0][0] + e[1][0] * e[1][0], e[0][0] * e[0][1] + e[1][0] * e[1][1]);
    assert!((ete.0 - 1.0).abs() < 1e-12 && ete.1.abs() < 1e-12);
}

#[test]
fn json_round_trip() {
    let par = [false, true];
    let a = &mono(&par, &[1, 1], &[0, 1], 2, r(3, 4)) + &mono(&par, &[0, 0], &[2, 0], 0, r(-1, 1));
    assert_eq!(W::from_json(&a.to_json()).unwrap(), a);
    assert!(W::from_json(&serde_json::json!({"n": 1, "terms": [{"x": [1, 2]}]})).is_err());
    assert!(W::from_json(&serde_json::json!({"terms": []})).is_err());
}

/// Action on polynomials `ψ(x)`: `x̂` multiplies, `p̂ = (ħ/i)∂⃗`.
fn act(a: &W, psi: &Jet<Rational>) -> Jet<Rational> {
    let sp = psi.space().clone();
    let eta = Jet::var(&sp, sp.var("hbar", 0).unwrap());
    let mut out = Jet::zero(&sp);
    for (xs, ps, h, c) in a.terms() {
        let mut t = psi.clone();
        for (i, &e) in ps.iter().enumerate().rev() {
            for _ in 0..e {
                t = &eta * &t.derivative(sp.var("x", i).unwrap(), Side::Left).unwrap();
            }
        }
        let mut f = vec![];
        for (i, &e) in xs.iter().enumerate() {
            f.push((sp.var("x", i).unwrap(), e));
        }
        f.push((sp.var("hbar", 0).unwrap(), h as u16));
        t = &Jet::monomial(&sp, &f, c.clone()) * &t;
        out = &out + &t;
    }
    out
}

fn random_element(par: &[bool], c: &[i64]) -> W {
    let n = par.len();
    let mut out = W::zero(par);
    for (k, ch) in c.chunks(2 * n + 1).enumerate() {
        if ch.len() < 2 * n + 1 {
            break;
        }
        let x: Vec<u16> = ch[..n].iter().map(|&v| v.unsigned_abs() as u16 % 3).collect();
        let p: Vec<u16> = ch[n..2 * n].iter().map(|&v| v.unsigned_abs() as u16 % 3).collect();
        out = &out + &mono(par, &x, &p, (k % 2) as u32, r(ch[2 * n], 1));
    }
    out
}

fn random_quadratic(par: &[bool], c: &[i64]) -> Jet<Rational> {
    hamiltonian(par, c)
}

fn psi_space(par: &[bool]) -> Arc<JetSpace> {
    JetSpace::new(vec![(Block::with_parities("x", par), 14), (Block::even("hbar", 1), 14)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_matches_the_operator_action(a in prop::collection::vec(-3i64..=3, 15), b in prop::collection::vec(-3i64..=3, 15), odd in any::<bool>()) {
        let par = [false, odd];
        let (ea, eb) = (random_element(&par, &a), random_element(&par, &b));
        let sp = psi_space(&par);
        let vars = sp.vars("x").unwrap();
        for psi in [Jet::one(&sp), Jet::var(&sp, vars[0]), &Jet::monomial(&sp, &[(vars[0], 3), (vars[1], 1)], r(1, 1)) + &Jet::monomial(&sp, &[(vars[1], 2)], r(2, 1))] {
            prop_assert_eq!(act(&(&ea * &eb), &psi), act(&ea, &act(&eb, &psi)));
        }
    }

    #[test]
    fn product_is_associative(a in prop::collection::vec(-2i64..=2, 10), b in prop::collection::vec(-2i64..=2, 10), c in prop::collection::vec(-2i64..=2, 10), odd in any::<bool>()) {
        let par = [odd, true];
        let (ea, eb, ec) = (random_element(&par, &a), random_element(&par, &b), random_element(&par, &c));
        prop_assert_eq!(&(&ea * &eb) * &ec, &ea * &(&eb * &ec));
    }

    #[test]
    fn quantum_bracket_satisfies_jacobi(a in prop::collection::vec(-2i64..=2, 10), b in prop::collection::vec(-2i64..=2, 10), c in prop::collection::vec(-2i64..=2, 10)) {
        let par = [false, true];
        let (ea, eb, ec) = (random_element(&par, &a).part(false), random_element(&par, &b).part(false), random_element(&par, &c).part(true));
        let j1 = quantum_poisson(&ea, &quantum_poisson(&eb, &ec).unwrap()).unwrap();
        let j2 = quantum_poisson(&quantum_poisson(&ea, &eb).unwrap(), &ec).unwrap();
        let j3 = quantum_poisson(&eb, &quantum_poisson(&ea, &ec).unwrap()).unwrap();
        prop_assert_eq!(j1, &j2 + &j3);
    }

    #[test]
    fn symbol_is_a_bracket_homomorphism(a in prop::collection::vec(-2i64..=2, 10), b in prop::collection::vec(-2i64..=2, 10), odd in any::<bool>()) {
        let par = [false, odd];
        let (ea, eb) = (random_element(&par, &a), random_element(&par, &b));
        let (ea, eb) = (ea.part(false), &eb.part(false) + &eb.part(true));
        let lhs = quantum_poisson(&ea, &eb).unwrap().principal_symbol();
        let rhs = poisson_bracket(&ea.principal_symbol(), &eb.principal_symbol()).unwrap();
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn quantization_is_a_section(c in prop::collection::vec(-3i64..=3, 12), s in 0i64..=4, odd in any::<bool>()) {
        let par = [false, odd];
        let h = random_quadratic(&par, &c);
        prop_assert!(same(&quantize_s(&h, &r(s, 4)).unwrap().principal_symbol(), &h));
    }

    #[test]
    fn weyl_ordering_is_a_homomorphism(a in prop::collection::vec(-3i64..=3, 12), b in prop::collection::vec(-3i64..=3, 12), odd in any::<bool>()) {
        let par = [false, odd];
        let (h1, h2) = (random_quadratic(&par, &a), random_quadratic(&par, &b));
        let half = r(1, 2);
        let lhs = quantum_poisson(&quantize_s(&h1, &half).unwrap(), &quantize_s(&h2, &half).unwrap()).unwrap();
        prop_assert_eq!(lhs, quantize_s(&poisson_bracket(&h1, &h2).unwrap(), &half).unwrap());
    }

    #[test]
    fn defect_is_a_cocycle(a in prop::collection::vec(-3i64..=3, 12), b in prop::collection::vec(-3i64..=3, 12), c in prop::collection::vec(-3i64..=3, 12), s in 0i64..=4, odd in any::<bool>()) {
        let par = [false, odd];
        let s = r(s, 5);
        let h: Vec<Jet<Rational>> = [a, b, c].iter().map(|v| random_quadratic(&par, v)).collect();
        let mut total = r(0, 1);
        for k in 0..3 {
            let (x, y, z) = (&h[k], &h[(k + 1) % 3], &h[(k + 2) % 3]);
            let xy = poisson_bracket(x, y).unwrap();
            total = total + cocycle_defect(&xy, z, &s).unwrap();
        }
        prop_assert_eq!(total, r(0, 1));
        let d = ordering_defect(&h[0], &h[1], &s).unwrap();
        prop_assert_eq!(d.clone(), -ordering_defect(&h[1], &h[0], &s).unwrap());
        let d0 = ordering_defect(&h[0], &h[1], &r(0, 1)).unwrap();
        prop_assert_eq!(d, d0 * (r(1, 1) - r(2, 1) * s));
    }

    #[test]
    fn adjoint_preserves_the_pairing(c in prop::collection::vec(-3i64..=3, 12), odd in any::<bool>()) {
        let par = [false, odd];
        let hj = random_quadratic(&par, &c);
        let hw = quantize_s(&hj, &r(1, 2)).unwrap();
        let m = adjoint_on_l(&hw).unwrap();
        let j = canonical_pairing::<Rational>(&par);
        let k = m.len();
        for a in 0..k {
            for b in 0..k {
                let mtj: Rational = (0..k).map(|l| m[l][a].clone() * j[l][b].clone()).sum();
                let jm: Rational = (0..k).map(|l| j[a][l].clone() * m[l][b].clone()).sum();
                prop_assert_eq!(mtj + jm, r(0, 1));
            }
        }
        let basis = linear_basis::<Rational>(&par);
        for a in 0..k {
            for b in 0..k {
                let w = quantum_poisson(&basis[a], &basis[b]).unwrap();
                prop_assert_eq!(w.coeff(&[0, 0], &[0, 0], 0), j[a][b].clone());
            }
        }
    }
}
