use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::field::Rational;
use crate::jet::{Block, JetSpace};

type G = GrassmannNumber<Rational>;
type M = SuperMatrix<G>;

fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

fn scalar(g: u8, n: i64) -> G {
    G::scalar(g, q(n))
}

/// Random homogeneous element: body only when even and `with_body`.
fn random_entry(rng: &mut ChaCha8Rng, g: u8, odd: bool, with_body: bool) -> G {
    let mut x = G::zero(g);
    for mask in 0u32..(1 << g) {
        if (mask.count_ones() % 2 == 1) != odd || (mask == 0 && !with_body) {
            continue;
        }
        if rng.gen_bool(0.5) {
            x = x.add(&G::term(g, mask, q(rng.gen_range(-3..=3))));
        }
    }
    x
}

/// Random even supermatrix; with bodies it is diagonally dominant, hence invertible.
fn random_even(rng: &mut ChaCha8Rng, g: u8, par: &[bool], with_body: bool) -> M {
    let n = par.len() as i64;
    M::from_fn(par.to_vec(), par.to_vec(), |i, j| {
        let e = random_entry(rng, g, par[i] ^ par[j], with_body);
        if with_body && i == j {
            e.add(&scalar(g, 4 * n))
        } else {
            e
        }
    })
}

fn random_par(rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

#[test]
fn product_examples() {
    let g = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_even(&mut rng, g, &[false, true], true);
    assert_eq!(M::identity(vec![false, true], &G::zero(g)).mul(&a).unwrap(), a);

    let t1 = M::new(vec![false], vec![true], vec![vec![G::generator(g, 0)]]).unwrap();
    let t2 = M::new(vec![true], vec![false], vec![vec![G::generator(g, 1)]]).unwrap();
    assert_eq!(*t1.mul(&t2).unwrap().get(0, 0), G::generator(g, 0).mul(&G::generator(g, 1)));

    let num = |rows: [[i64; 2]; 2]| M::new(vec![false; 2], vec![false; 2], rows.iter().map(|r| r.iter().map(|&x| scalar(g, x)).collect()).collect()).unwrap();
    assert_eq!(num([[1, 2], [3, 4]]).mul(&num([[5, 6], [7, 8]])).unwrap(), num([[19, 22], [43, 50]]));
    assert!(matches!(t1.mul(&t1), Err(Error::Shape(_))));
}

#[test]
fn supertrace_examples() {
    let g = 2;
    assert!(M::identity(vec![false, true], &G::zero(g)).supertrace().unwrap().is_zero());
    let d = M::new(vec![false, true], vec![false, true], vec![vec![scalar(g, 5), G::zero(g)], vec![G::zero(g), scalar(g, 2)]]).unwrap();
    assert_eq!(d.supertrace().unwrap(), scalar(g, 3));
    let r = M::zero(vec![false], vec![false, true], &G::zero(g));
    assert!(matches!(r.supertrace(), Err(Error::Shape(_))));
}

/// Hand-expanded algebra on two generators, basis (1, θ₁, θ₂, θ₁θ₂).
fn mul2(a: &[Rational; 4], b: &[Rational; 4]) -> [Rational; 4] {
    [
        a[0].clone() * b[0].clone(),
        a[0].clone() * b[1].clone() + a[1].clone() * b[0].clone(),
        a[0].clone() * b[2].clone() + a[2].clone() * b[0].clone(),
        a[0].clone() * b[3].clone() + a[3].clone() * b[0].clone() + a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
    ]
}

fn to2(x: &G) -> [Rational; 4] {
    [x.coeff(0), x.coeff(1), x.coeff(2), x.coeff(3)]
}

fn str_product_oracle(a: &M, b: &M) -> [Rational; 4] {
    let mut acc = [q(0), q(0), q(0), q(0)];
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let p = mul2(&to2(a.get(i, k)), &to2(b.get(k, i)));
            for (s, t) in acc.iter_mut().zip(p) {
                *s = if a.row_parities()[i] { s.clone() - t } else { s.clone() + t };
            }
        }
    }
    acc
}

#[test]
fn supertrace_of_products_matches_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let par = random_par(&mut rng);
        let a = random_even(&mut rng, 2, &par, true);
        let b = random_even(&mut rng, 2, &par, true);
        let ab = a.mul(&b).unwrap().supertrace().unwrap();
        let ba = b.mul(&a).unwrap().supertrace().unwrap();
        assert_eq!(to2(&ab), str_product_oracle(&a, &b));
        assert_eq!(to2(&ba), str_product_oracle(&b, &a));
        assert_eq!(ab, ba);
    }
}

fn det3(m: &[[i64; 3]; 3]) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[test]
fn berezinian_examples() {
    let g = 4;
    assert_eq!(M::identity(vec![false, true, true], &G::zero(g)).berezinian().unwrap(), scalar(g, 1));
    let m = [[2, -1, 0], [3, 0, 4], [1, 1, 5]];
    let a = M::new(vec![false; 3], vec![false; 3], m.iter().map(|r| r.iter().map(|&x| scalar(g, x)).collect()).collect()).unwrap();
    assert_eq!(a.berezinian().unwrap(), scalar(g, det3(&m)));
    // (0|1): Ber(t) = 1/t
    let t = M::new(vec![true], vec![true], vec![vec![scalar(g, 4)]]).unwrap();
    assert_eq!(t.berezinian().unwrap().body(), Rational::new(1.into(), 4.into()));
}

#[test]
fn berezinian_errors() {
    let g = 2;
    let singular = M::new(vec![false, true], vec![false, true], vec![vec![scalar(g, 1), G::zero(g)], vec![G::zero(g), G::zero(g)]]).unwrap();
    assert!(matches!(singular.berezinian(), Err(Error::Singular(_))));
    let odd_diag = M::new(vec![false], vec![false], vec![vec![G::generator(g, 0)]]).unwrap();
    assert!(matches!(odd_diag.berezinian(), Err(Error::Parity(_))));
    assert!(matches!(M::new_even(vec![false], vec![false], vec![vec![G::generator(g, 0)]]), Err(Error::Parity(_))));
}

#[test]
fn liouville_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let par = random_par(&mut rng);
        let x = random_even(&mut rng, 4, &par, false);
        let lhs = x.exp().unwrap().berezinian().unwrap();
        let rhs = x.supertrace().unwrap().exp().unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn str_log_examples() {
    let g = 2;
    assert!(M::zero(vec![false, true], vec![false, true], &G::zero(g)).str_log_one_minus(10).unwrap().is_zero());

    let a = SuperMatrix::new(vec![false], vec![false], vec![vec![GrassmannNumber::scalar(g, 0.3f64)]]).unwrap();
    let v = a.str_log_one_minus(60).unwrap().body();
    assert!((v - (0.7f64).ln()).abs() < 1e-12);

    let big = SuperMatrix::new(vec![false], vec![false], vec![vec![GrassmannNumber::scalar(g, 1.5f64)]]).unwrap();
    assert!(matches!(big.str_log_one_minus(10), Err(Error::Domain(_))));
}

#[test]
fn str_log_matches_log_berezinian_numerically() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let vals: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let e = |x: f64| GrassmannNumber::scalar(2, x);
        let a = SuperMatrix::new(vec![false, true], vec![false, true], vec![vec![e(vals[0]), e(0.0)], vec![e(0.0), e(vals[3])]]).unwrap();
        // off-diagonal numeric entries of a (1|1) even matrix must vanish
        let one_minus = SuperMatrix::identity(vec![false, true], &e(0.0)).sub(&a).unwrap();
        let ln_ber = one_minus.berezinian().unwrap().ln().unwrap().body();
        let s = a.str_log_one_minus(200).unwrap().body();
        assert!((s - ln_ber).abs() < 1e-10, "{s} vs {ln_ber}");
    }
}

#[test]
fn str_log_is_exact_for_nilpotent_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let par = random_par(&mut rng);
        let a = random_even(&mut rng, 4, &par, false);
        let one_minus = M::identity(par.clone(), &G::zero(4)).sub(&a).unwrap();
        assert_eq!(a.str_log_one_minus(16).unwrap(), one_minus.berezinian().unwrap().ln().unwrap());
    }
}

#[test]
fn jet_entries() {
    let s = JetSpace::new(vec![(Block::even("l", 1), 3), (Block::with_parities("th", &[true, true]), 2)]).unwrap();
    let l = crate::jet::Jet::<Rational>::var(&s, s.var("l", 0).unwrap());
    let t1 = crate::jet::Jet::var(&s, s.var("th", 0).unwrap());
    let t2 = crate::jet::Jet::var(&s, s.var("th", 1).unwrap());
    let one = crate::jet::Jet::one(&s);
    // [[1 + l, θ₁], [θ₂, 1]]: Ber = 1 + l − θ₁θ₂
    let m = SuperMatrix::new_even(vec![false, true], vec![false, true], vec![vec![&one + &l, t1.clone()], vec![t2.clone(), one.clone()]]).unwrap();
    assert_eq!(m.berezinian().unwrap(), &(&one + &l) - &(&t1 * &t2));
    assert_eq!(m.berezinian_p_block().unwrap(), m.berezinian().unwrap());
}

proptest! {
    #[test]
    fn berezinian_is_multiplicative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let par = random_par(&mut rng);
        let a = random_even(&mut rng, 4, &par, true);
        let b = random_even(&mut rng, 4, &par, true);
        let ab = a.mul(&b).unwrap().berezinian().unwrap();
        prop_assert_eq!(ab, a.berezinian().unwrap().mul(&b.berezinian().unwrap()));
    }

    #[test]
    fn schur_forms_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let par = random_par(&mut rng);
        let a = random_even(&mut rng, 4, &par, true);
        prop_assert_eq!(a.berezinian().unwrap(), a.berezinian_p_block().unwrap());
    }

    #[test]
    fn supertrace_kills_supercommutators(seed in any::<u64>(), odd_a in any::<bool>(), odd_b in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let par = random_par(&mut rng);
        let make = |rng: &mut ChaCha8Rng, odd: bool| M::from_fn(par.clone(), par.clone(), |i, j| random_entry(rng, 4, par[i] ^ par[j] ^ odd, !odd));
        let a = make(&mut rng, odd_a);
        let b = make(&mut rng, odd_b);
        prop_assert!(a.supercommutator(&b).unwrap().supertrace().unwrap().is_zero());
    }
}

#[test]
fn inverse_of_even_supermatrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let par = random_par(&mut rng);
        let a = random_even(&mut rng, 4, &par, true);
        let id = M::identity(par.clone(), &G::zero(4));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), id);
        assert_eq!(inv.mul(&a).unwrap(), id);
    }
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_even(&mut rng, 4, &[false, true, true], true);
    let v = json::supermatrix_to_json(&a);
    assert_eq!(json::supermatrix_from_json::<Rational>(&v).unwrap(), a);
}
