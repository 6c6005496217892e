use std::sync::Arc;

use crate::error::{bail, Error, Result};
use crate::field::Field;
use crate::jet::{Block, Jet, JetSpace, Side, Var};
use crate::super_linear::SuperMatrix;
use crate::thick_classical::GeneratingFunction;

use super::QuadraticAction;

const Y: &str = "__y";
const Q: &str = "__q";

fn check_composable<F: Field>(t: &QuadraticAction<F>, s: &QuadraticAction<F>) -> Result<()> {
    if s.target_parities() != t.source_parities() {
        bail!(
            Shape,
            "target of the first action ({:?}) differs from the source of the second ({:?})",
            s.target_parities(),
            t.source_parities()
        );
    }
    Ok(())
}

/// Parameter space shared by both actions.
fn joint_params<F: Field>(t: &QuadraticAction<F>, s: &QuadraticAction<F>) -> Result<Arc<JetSpace>> {
    s.params().union_with(t.params(), &[])
}

/// Classical composite `T ∘ S`: the critical value of
/// `T(y, r) + S(x, q) − yⁱqᵢ` in `(y, q)`, with weight 1.
pub fn compose_classical<F: Field>(t: &QuadraticAction<F>, s: &QuadraticAction<F>) -> Result<QuadraticAction<F>> {
    check_composable(t, s)?;
    let mid = s.target_parities();
    let params = joint_params(t, s)?;
    let src = Block::with_parities("x", &s.source_parities());
    let tgt = Block::with_parities("r", &t.target_parities());
    let mut blocks = vec![(src, 2), (tgt, 2)];
    blocks.extend(params.other_blocks(&[]));
    let outer = JetSpace::new(blocks)?;
    let work = outer.with_block(Block::with_parities(Y, &mid), 2)?.with_block(Block::with_parities(Q, &mid), 2)?;

    let tj = t.s().rename_block("x", Y)?.rename_block("q", "r")?.embed(&work)?;
    let sj = s.s().rename_block("q", Q)?.embed(&work)?;
    let yv = work.vars(Y)?;
    let qv = work.vars(Q)?;
    let mut f = &tj + &sj;
    for (&y, &q) in yv.iter().zip(&qv) {
        f = &f - &(&Jet::var(&work, y) * &Jet::var(&work, q));
    }

    let unknowns: Vec<Var> = yv.iter().chain(&qv).copied().collect();
    let par: Vec<bool> = mid.iter().chain(&mid).copied().collect();
    let zeros = vec![F::zero(); mid.len()];
    let drop_u = |j: &Jet<F>| -> Result<Jet<F>> { j.evaluate_block(Y, &zeros)?.evaluate_block(Q, &zeros)?.embed(&outer) };
    let grad: Vec<Jet<F>> = unknowns.iter().map(|&u| f.derivative(u, Side::Left)).collect::<Result<_>>()?;
    let b: Vec<Jet<F>> = grad.iter().map(&drop_u).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(grad.len());
    for e in &grad {
        rows.push(unknowns.iter().map(|&u| drop_u(&e.derivative(u, Side::Right)?)).collect::<Result<Vec<_>>>()?);
    }
    let m = SuperMatrix::new_even(par.clone(), par, rows)?;
    let minv = m.inverse().map_err(|e| Error::Transversality(format!("stationarity system is degenerate: {e}")))?;
    let assignment: Vec<(Var, Jet<F>)> = unknowns
        .iter()
        .enumerate()
        .map(|(k, &u)| {
            let sol = (0..b.len()).fold(Jet::zero(&outer), |acc, l| &acc - &(minv.get(k, l) * &b[l]));
            (u, sol)
        })
        .collect();
    let value = f.substitute(&outer, &assignment, true)?;
    QuadraticAction::new(value.rename_block("r", "q")?)
}

/// `Ber(δ − T_{ik}S^{kj}(−1)^k̃)` with `T_{ik}` the position Hessian of `T` and
/// `S^{kj}` the momentum Hessian of `S`, as a jet over the joint parameters.
pub fn cocycle_weight<F: Field>(t: &QuadraticAction<F>, s: &QuadraticAction<F>) -> Result<Jet<F>> {
    check_composable(t, s)?;
    let params = joint_params(t, s)?;
    let mid = s.target_parities();
    let n = mid.len();
    let tt = t.s_ab();
    let ss = s.s_ij();
    let e = |j: &Jet<F>| j.embed(&params);
    let mut rows = vec![Vec::with_capacity(n); n];
    for (i, row) in rows.iter_mut().enumerate() {
        for j in 0..n {
            let mut acc = if i == j { Jet::one(&params) } else { Jet::zero(&params) };
            for k in 0..n {
                let p = &e(&tt[i][k])? * &e(&ss[k][j])?;
                acc = if mid[k] { &acc + &p } else { &acc - &p };
            }
            row.push(acc);
        }
    }
    if n == 0 {
        return Ok(Jet::one(&params));
    }
    SuperMatrix::new_even(mid.clone(), mid, rows)?.berezinian()
}

/// Quantum correction `c = ½ ln` of [`cocycle_weight`] (principal branch); the
/// composite constant term is shifted by `−(ħ/i)c`.
pub fn cocycle<F: Field>(t: &QuadraticAction<F>, s: &QuadraticAction<F>) -> Result<Jet<F>> {
    Ok(cocycle_weight(t, s)?.log_principal()?.scale(&F::from_ratio(1, 2)))
}

/// Quantum composite: the classical composite with weight `w_T·w_S·cocycle_weight`.
pub fn compose_quantum<F: Field>(t: &QuadraticAction<F>, s: &QuadraticAction<F>) -> Result<QuadraticAction<F>> {
    let c = compose_classical(t, s)?;
    let params = c.params().clone();
    let w = &(&t.weight().embed(&params)? * &s.weight().embed(&params)?) * &cocycle_weight(t, s)?.embed(&params)?;
    c.with_weight(w)
}

/// Composition of quadratic generating functions by exact linear algebra.
///
/// The result lives on `x` with the bound of `s21` and `q` with the bound of `s32`.
pub fn compose_generating_functions<F: Field>(
    s32: &GeneratingFunction<F>,
    s21: &GeneratingFunction<F>,
) -> Result<GeneratingFunction<F>> {
    let t = QuadraticAction::from_generating_function(s32)?;
    let s = QuadraticAction::from_generating_function(s21)?;
    let c = compose_classical(&t, &s)?;
    let xs = s21.space();
    let qs = s32.space();
    let mut blocks = vec![
        (xs.block("x").unwrap().clone(), xs.trunc_of("x").unwrap()),
        (qs.block("q").unwrap().clone(), qs.trunc_of("q").unwrap()),
    ];
    blocks.extend(c.params().other_blocks(&[]));
    GeneratingFunction::new(c.s().embed(&JetSpace::new(blocks)?)?)
}
