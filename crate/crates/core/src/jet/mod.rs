//! Truncated Taylor jets, an expression graph that evaluates over them, and a
//! finite-difference oracle used to cross-check every analytic derivative.

mod expr;
mod fd;
mod series;

pub use expr::{Expr, JetError};
pub use fd::{fd_partial, fd_partial_vec, DirectionalJet, FdError};
pub use series::{Jet, JetScalar, PhiJet, Series};
