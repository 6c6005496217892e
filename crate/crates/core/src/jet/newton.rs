use crate::error::{bail, Result};
use crate::field::Field;
use crate::super_linear::even_inverse;

use super::algebra::Jet;
use super::space::Block;

const DIRECTION_BLOCK: &str = "__newton_d";

/// Solve `u = map(u)` by damped Newton iteration on jets with even unknowns.
///
/// `map` must accept jets over any extension of the space of `initial` and
/// return jets over the space of its arguments; the Jacobian is obtained by
/// evaluating it on `u + d` with a first-order direction block `d`.
pub fn solve_newton<F, M>(initial: Vec<Jet<F>>, mut map: M, tol: f64, max_iter: usize) -> Result<Vec<Jet<F>>>
where
    F: Field,
    M: FnMut(&[Jet<F>]) -> Result<Vec<Jet<F>>>,
{
    let n = initial.len();
    if n == 0 {
        return Ok(initial);
    }
    if initial.iter().any(|u| !u.is_even()) {
        bail!(Parity, "Newton iteration needs even unknowns");
    }
    let space = initial[0].space().clone();
    let ext = space.with_block(Block::even(DIRECTION_BLOCK, n), 1)?;
    let dirs = ext.vars(DIRECTION_BLOCK)?;
    let zeros = vec![F::zero(); n];
    let residual = |map: &mut M, u: &[Jet<F>]| -> Result<Vec<Jet<F>>> {
        let m = map(u)?;
        Ok(u.iter().zip(&m).map(|(a, b)| a - b).collect())
    };
    let size = |r: &[Jet<F>]| r.iter().map(Jet::max_abs).fold(0.0, f64::max);

    let mut u = initial;
    let mut r = residual(&mut map, &u)?;
    for _ in 0..max_iter {
        let lifted: Vec<Jet<F>> = u
            .iter()
            .zip(&dirs)
            .map(|(ui, &d)| Ok(&ui.embed(&ext)? + &Jet::var(&ext, d)))
            .collect::<Result<_>>()?;
        let image = map(&lifted)?;
        if image.len() != n {
            bail!(Shape, "Newton map changed the number of unknowns");
        }
        let mut jac = vec![Vec::with_capacity(n); n];
        for (i, row) in jac.iter_mut().enumerate() {
            for (j, &d) in dirs.iter().enumerate() {
                let dpsi = image[i].coefficient_of_power(d, 1).evaluate_block(DIRECTION_BLOCK, &zeros)?;
                let e = if i == j { &Jet::one(&space) - &dpsi } else { -&dpsi };
                row.push(e);
            }
        }
        let inv = even_inverse(&jac, &Jet::zero(&space)).map_err(|e| crate::error::Error::Convergence(format!("Newton Jacobian: {e}")))?;
        let step: Vec<Jet<F>> = (0..n).map(|i| (0..n).fold(Jet::zero(&space), |acc, j| &acc + &(&inv[i][j] * &r[j]))).collect();
        let scale = 1.0 + size(&u);
        let mut damping = F::one();
        let half = F::from_ratio(1, 2);
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<Jet<F>> = u.iter().zip(&step).map(|(a, s)| a - &s.scale(&damping)).collect();
            let rt = residual(&mut map, &trial)?;
            if size(&rt) <= size(&r) || size(&rt) <= tol * scale {
                accepted = Some((trial, rt));
                break;
            }
            damping = damping * half.clone();
        }
        let Some((next, rn)) = accepted else { bail!(Convergence, "Newton line search failed") };
        let moved = size(&step) * damping.magnitude();
        u = next;
        r = rn;
        if size(&r) <= tol * scale || (moved <= tol * scale && size(&r) <= tol.sqrt() * scale) {
            return Ok(u);
        }
    }
    bail!(Convergence, "Newton iteration did not converge in {max_iter} steps (residual {:.3e})", size(&r))
}
