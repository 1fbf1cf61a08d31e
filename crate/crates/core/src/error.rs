use thiserror::Error;

use crate::jet::{FdError, JetError};
use crate::quadrature::QuadError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("conformal factor must be nonzero")]
    ZeroConformalFactor,
    #[error("shift has {got} components, expected {expected}")]
    ShiftLength { expected: usize, got: usize },
    #[error("direction y is zero")]
    ZeroDirection,
    #[error("metric is not invertible")]
    DegenerateMetric,
    #[error("|s| = {s} exceeds b = {b}")]
    Extremal { s: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhiError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("s = {s} is outside the admissible interval ({lo}, {hi}) at b2 = {b2}")]
    Domain { b2: f64, s: f64, lo: f64, hi: f64 },
    #[error("integrand denominator vanishes at t = {root} on the path to s = {s} (b2 = {b2})")]
    DenominatorZero { b2: f64, s: f64, root: f64 },
    #[error("radicand is nonpositive at (b2 = {b2}, s = {s})")]
    Radicand { b2: f64, s: f64 },
    #[error("lambda3 = {value} is not positive at b2 = {b2}")]
    Lambda3 { b2: f64, value: f64 },
    #[error("compatibility residual is undefined at s = 0")]
    ZeroS,
    #[error("b2 = {0} must be positive")]
    B2(f64),
    #[error("parameter mismatch: {0}")]
    Parameters(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error("singular denominator: {which} = {value:e} at (b2 = {b2}, s = {s})")]
    Singular {
        which: &'static str,
        value: f64,
        b2: f64,
        s: f64,
    },
    #[error("extremal direction |s| = {s} >= b = {b}")]
    Extremal { s: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantity(#[from] QuantityError),
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Fd(#[from] FdError),
    #[error("fundamental tensor is not positive definite")]
    NotPositiveDefinite,
    #[error("fundamental tensor is singular (condition number {0:e})")]
    Singular(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error("empty grid")]
    EmptyGrid,
}
