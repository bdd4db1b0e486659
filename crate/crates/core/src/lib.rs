//! Exact certification of polynomial first integrals for stationary,
//! axisymmetric metrics via prolongation and projection.

pub mod algebra;
pub mod modp;

pub use algebra::{AlgebraError, BiPoly, Int, Rat, RatFunc, Var};
pub mod metric;
pub mod momentum;
pub mod system;
pub mod field;
pub mod prolong;
pub mod elim;
pub mod rank;
pub mod analysis;
