//! Truncated multivariate power series ("jets") with even and odd variables.

mod algebra;
mod fixed_point;
mod newton;
pub mod json;
mod series;
mod space;

pub use algebra::{Jet, Side};
#[allow(unused_imports)]
pub(crate) use algebra::koszul_sign;
pub use fixed_point::solve_fixed_point;
pub use newton::solve_newton;
pub use space::{Block, JetSpace, Var};
