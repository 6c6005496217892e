//! Classical and quantum thick (microformal) morphisms.
//!
//! The crate is organised bottom-up:
//!
//! * [`jet`]: truncated multivariate power series over even and odd variables,
//!   the carrier for generating functions, Hamiltonians, phases and amplitudes;
//! * [`super_linear`]: Grassmann numbers, supermatrices, supertrace and
//!   Berezinian;
//! * [`thick_classical`] and [`thick_quantum`]: pullbacks and composition of
//!   thick morphisms given by generating functions `S(x, q)`;
//! * [`dynamics`]: Hamilton–Jacobi and Schrödinger evolution of pullbacks and
//!   actions, and the derivation formulas for one-parameter families;
//! * [`weyl`]: the Weyl algebra in `xp`-normal form, `s`-ordered quantization
//!   and its ordering cocycle;
//! * [`spinor`]: quadratic actions, linear canonical relations and their
//!   classical and quantum composition.
//!
//! Throughout, the formal parameter in quantum objects is `ħ/i` rather than
//! `ħ`: the Heisenberg relation reads `[p̂, x̂] = ħ/i`, so with this choice
//! every identity of the theory has rational coefficients.

pub mod dynamics;
pub mod error;
pub mod field;
pub mod jet;
pub mod spinor;
pub mod super_linear;
pub mod thick_classical;
pub mod thick_quantum;
pub mod weyl;

pub use error::{Error, Result};
pub use field::{Field, Rational};
pub use jet::{Block, Jet, JetSpace, Side, Var};
