//! Numerical engine for general `(alpha, beta)`-metrics `F = alpha phi(b^2, beta/alpha)`
//! whose 1-form is closed and conformal to `alpha`.

pub mod classify;
pub mod config;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod phi;
pub mod quadrature;
pub mod quantities;
pub mod tensor;

pub use classify::{
    build_grid, classify_point, scan, scan_points, verify_theorem, Aggregate, GridPoint,
    PointRecord, PointVerdict, ResidualReport, SuiteOutcome, Theorem, Verdicts,
};
pub use config::{GridSpec, ModelConfig, OutputConfig, OutputFormat, RunConfig, Tolerances};
pub use error::{ConfigError, GeometryError, PhiError, QuantityError, TensorError};
pub use geometry::{
    build_euclidean_conformal, frame_at, AnisotropicFrame, ConformalStructure, EuclideanConformal,
};
pub use indexmap::IndexMap;
pub use jet::{Expr, Jet, PhiJet, Series};
pub use phi::{
    custom_phi, riemannian_phi, shen_example_phi, sqrt_quadratic_phi, unicorn_phi,
    CoefficientFunction, Interval, PhiKind, PhiModel, PhiSpec, RiemannianParams, UnicornParams,
};
pub use quantities::{model_quantities, QuantitySet};
pub use tensor::{Provenance, Tensor3, Tensor4, TensorBundle};
