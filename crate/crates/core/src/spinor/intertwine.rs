use std::sync::Arc;

use crate::error::{bail, Result};
use crate::field::Field;
use crate::jet::{Block, Jet, JetSpace};

use super::QuadraticAction;

/// `Δ = xᵃAₐ + Bᵃpₐ + K` of parity `ε` on a space with the given parities.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearHamiltonian<F> {
    pub parities: Vec<bool>,
    pub a: Vec<F>,
    pub b: Vec<F>,
    pub k: F,
    pub parity: bool,
}

impl<F: Field> LinearHamiltonian<F> {
    pub fn new(parities: Vec<bool>, a: Vec<F>, b: Vec<F>, k: F, parity: bool) -> Result<Self> {
        let h = LinearHamiltonian { parities, a, b, k, parity };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.parities.len();
        if self.a.len() != n || self.b.len() != n {
            bail!(Shape, "linear Hamiltonian on a space of dimension {n} needs {n} coefficients in A and B");
        }
        for (i, &odd) in self.parities.iter().enumerate() {
            if odd != self.parity && !(self.a[i].is_zero() && self.b[i].is_zero()) {
                bail!(Parity, "coefficient {i} would break the parity of the Hamiltonian");
            }
        }
        if self.parity && !self.k.is_zero() {
            bail!(Parity, "an odd Hamiltonian has no scalar term");
        }
        Ok(())
    }

    /// The classical symbol as a jet over blocks `pos` and `mom`.
    pub fn symbol(&self, pos: &str, mom: &str) -> Result<Jet<F>> {
        let sp: Arc<JetSpace> =
            JetSpace::new(vec![(Block::with_parities(pos, &self.parities), 2), (Block::with_parities(mom, &self.parities), 2)])?;
        let mut h = Jet::constant(&sp, self.k.clone());
        for (i, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let x = Jet::var(&sp, sp.var(pos, i)?);
            let p = Jet::var(&sp, sp.var(mom, i)?);
            h = &h + &x.scale(a);
            h = &h + &p.scale(b);
        }
        Ok(h)
    }
}

/// Given an action `S` without parameters and the free data `B`, `C`, `K₁`
/// of parity `ε`, the unique pair `(Δ₁, Δ₂)` intertwined by `S`:
///
/// ```text
/// K₂ = BᵃSₐ + K₁ − SⁱCᵢ
/// Aₐ = SₐⁱCᵢ − (−1)^{b̃(ε+1)} S_{ab}Bᵇ
/// Dʲ = BᵃSₐʲ − (−1)^{ĩ(ε+1)} CᵢS^{ij}
/// ```
pub fn intertwine_solve<F: Field>(
    s: &QuadraticAction<F>,
    b: &[F],
    c: &[F],
    k1: F,
    parity: bool,
) -> Result<(LinearHamiltonian<F>, LinearHamiltonian<F>)> {
    if !s.params().blocks().is_empty() {
        bail!(Shape, "intertwining is solved for actions without parameter blocks");
    }
    let (src, tgt) = (s.source_parities(), s.target_parities());
    if b.len() != src.len() || c.len() != tgt.len() {
        bail!(Shape, "B needs {} and C needs {} coefficients", src.len(), tgt.len());
    }
    let num = |j: &Jet<F>| j.constant_term();
    let vec = |v: Vec<Jet<F>>| v.iter().map(num).collect::<Vec<F>>();
    let mat = |m: Vec<Vec<Jet<F>>>| m.into_iter().map(vec).collect::<Vec<_>>();
    let (s_a, s_i, s_ab, s_ai, s_ij) = (vec(s.s_a()), vec(s.s_i()), mat(s.s_ab()), mat(s.s_ai()), mat(s.s_ij()));
    let sign = |odd: bool, v: F| if odd && !parity { -v } else { v };
    let zero = F::zero();

    let mut k2 = k1.clone();
    for (ba, sa) in b.iter().zip(&s_a) {
        k2 = k2 + ba.clone() * sa.clone();
    }
    for (si, ci) in s_i.iter().zip(c) {
        k2 = k2 - si.clone() * ci.clone();
    }
    let a: Vec<F> = (0..src.len())
        .map(|a| {
            let mut v = zero.clone();
            for i in 0..tgt.len() {
                v = v + s_ai[a][i].clone() * c[i].clone();
            }
            for (bi, &odd) in src.iter().enumerate() {
                v = v - sign(odd, s_ab[a][bi].clone() * b[bi].clone());
            }
            v
        })
        .collect();
    let d: Vec<F> = (0..tgt.len())
        .map(|j| {
            let mut v = zero.clone();
            for ai in 0..src.len() {
                v = v + b[ai].clone() * s_ai[ai][j].clone();
            }
            for (i, &odd) in tgt.iter().enumerate() {
                v = v - sign(odd, c[i].clone() * s_ij[i][j].clone());
            }
            v
        })
        .collect();
    let h1 = LinearHamiltonian::new(src, a, b.to_vec(), k1, parity)?;
    let h2 = LinearHamiltonian::new(tgt, c.to_vec(), d, k2, parity)?;
    Ok((h1, h2))
}
