use crate::error::{bail, Result};
use crate::field::Field;

use super::algebra::Jet;

/// Solve `u = map(u)` for a vector of jets by iteration, modulo degree
/// `order + 1` in the grading block.
///
/// Each iteration must push the lowest grading degree of the correction up by
/// at least one; otherwise the map is reported as non-contractive. The result
/// is truncated to grading degree `order`, and its residual
/// `map(u) − u` has no terms of grading degree `≤ order`.
pub fn solve_fixed_point<F, M>(initial: Vec<Jet<F>>, grading_block: usize, order: u32, mut map: M) -> Result<Vec<Jet<F>>>
where
    F: Field,
    M: FnMut(&[Jet<F>]) -> Result<Vec<Jet<F>>>,
{
    let low = |j: &Jet<F>| j.filter_block_degree(grading_block, |d| d <= order);
    let mut current: Vec<Jet<F>> = initial.iter().map(low).collect();
    let mut last_valuation: Option<u32> = None;
    for _ in 0..(order as usize + 3) {
        let next = map(&current)?;
        if next.len() != current.len() {
            bail!(Shape, "fixed-point map changed the number of unknowns");
        }
        let next: Vec<Jet<F>> = next.iter().map(low).collect();
        let valuation = current
            .iter()
            .zip(&next)
            .filter_map(|(a, b)| (b - a).valuation(grading_block))
            .min();
        match valuation {
            None => return Ok(next),
            Some(v) => {
                if let Some(prev) = last_valuation {
                    if v <= prev {
                        bail!(NonContractive, "correction stuck at grading degree {v}");
                    }
                }
                last_valuation = Some(v);
            }
        }
        current = next;
    }
    bail!(NonContractive, "no fixed point modulo grading degree {}", order + 1)
}
