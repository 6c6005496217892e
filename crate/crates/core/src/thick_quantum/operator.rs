use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::Result;
use crate::field::Field;
use crate::jet::{Jet, JetSpace, Var};

/// Split a symbol by its exponents in the block `mom`: pairs `(α, C_α)` with
/// `H = Σ C_α mom^α` and `C_α` embedded into `target`.
pub(crate) fn momentum_groups<F: Field>(h: &Jet<F>, mom: &str, target: &Arc<JetSpace>) -> Result<Vec<(Vec<u16>, Jet<F>)>> {
    let vars = h.space().vars(mom)?;
    let mb = h.space().block_index(mom).unwrap();
    let mut alphas = BTreeSet::new();
    for (factors, _) in h.terms() {
        let mut alpha = vec![0u16; vars.len()];
        for (v, e) in factors {
            if v.block == mb {
                alpha[v.index] = e;
            }
        }
        alphas.insert(alpha);
    }
    let zeros = vec![F::zero(); vars.len()];
    alphas
        .into_iter()
        .map(|alpha| {
            let mut c = h.clone();
            for (&v, &e) in vars.iter().zip(&alpha) {
                c = c.coefficient_of_power(v, e);
            }
            Ok((alpha, c.evaluate_block(mom, &zeros)?.embed(target)?))
        })
        .collect()
}

/// Conjugated derivatives `D_j = ∂_j f + hbar·∂_j`, so that
/// `e^{−f/hbar} H(hbar∂) e^{f/hbar} A = Σ C_α D^α A`.
pub(crate) struct Conjugation<F> {
    df: Vec<Jet<F>>,
    vars: Vec<Var>,
    eta: Jet<F>,
}

impl<F: Field> Conjugation<F> {
    pub(crate) fn new(f: &Jet<F>, vars: &[Var], space: &Arc<JetSpace>) -> Result<Self> {
        Ok(Conjugation {
            df: vars.iter().map(|&v| f.d(v)).collect(),
            vars: vars.to_vec(),
            eta: Jet::var(space, space.var(super::HBAR, 0)?),
        })
    }

    fn step(&self, j: usize, a: &Jet<F>) -> Jet<F> {
        &(&self.df[j] * a) + &(&self.eta * &a.d(self.vars[j]))
    }

    pub(crate) fn apply(&self, groups: &[(Vec<u16>, Jet<F>)], a: &Jet<F>) -> Jet<F> {
        let mut cache: HashMap<Vec<u16>, Jet<F>> = HashMap::new();
        cache.insert(vec![0; self.vars.len()], a.clone());
        let mut acc = Jet::zero(a.space());
        for (alpha, c) in groups {
            let d = self.power(alpha, &mut cache);
            acc = &acc + &(c * &d);
        }
        acc
    }

    fn power(&self, alpha: &[u16], cache: &mut HashMap<Vec<u16>, Jet<F>>) -> Jet<F> {
        if let Some(d) = cache.get(alpha) {
            return d.clone();
        }
        let j = alpha.iter().position(|&e| e > 0).unwrap();
        let mut beta = alpha.to_vec();
        beta[j] -= 1;
        let prev = self.power(&beta, cache);
        let d = self.step(j, &prev);
        cache.insert(alpha.to_vec(), d.clone());
        d
    }
}
