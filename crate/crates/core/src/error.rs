//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A field was used with a grid other than the one it was built on.
    #[error(
        "grid mismatch: field is bound to grid #{field_grid}, operation ran on grid #{op_grid}"
    )]
    GridMismatch { field_grid: u64, op_grid: u64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{name}: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("non-finite value in {context}{}", .node.map_or_else(String::new, |n| format!(" at node {n}")))]
    NonFinite {
        context: String,
        node: Option<usize>,
    },

    /// The diffusion coefficient must be strictly positive everywhere.
    #[error("coefficient not strictly positive at node {node} ({coords}): a = {value}")]
    NonPositiveCoefficient {
        node: usize,
        coords: String,
        value: f64,
    },

    /// Cholesky failed on (C + jitter*I) even at the largest jitter rung.
    #[error(
        "covariance factorization failed at jitter {jitter:e} (pivot {pivot}); \
         the kernel/grid combination is numerically indefinite"
    )]
    FactorizationFailed { jitter: f64, pivot: usize },

    /// The assembled elliptic operator must be SPD; a failed pivot means the
    /// coefficients are non-physical.
    #[error("elliptic operator factorization failed at pivot {pivot}")]
    OperatorNotPositiveDefinite { pivot: usize },

    /// The covariance quadratic form came out negative beyond roundoff tolerance.
    #[error("covariance energy was negative beyond tolerance: {value:e}")]
    NegativeEnergy { value: f64 },

    #[error("degenerate functional: {0}")]
    DegenerateFunctional(String),

    /// Direct solve did not reproduce the right-hand side to tolerance.
    #[error("linear solve residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    /// Inner scalar fixed-point (the Lagrange multiplier) failed to settle.
    #[error(
        "multiplier iteration did not converge after {iterations} iterations: last residual \
         {last_residual:.3e}, contraction estimate {contraction:?} \
         (the noise scale is likely too large for the contraction regime)"
    )]
    MultiplierNonConvergence {
        iterations: usize,
        last_residual: f64,
        contraction: Option<f64>,
    },

    /// Outer fixed-point iteration on the dominant point failed to settle.
    #[error(
        "outer iteration did not converge after {iterations} iterations: last step \
         {last_step:.3e}, contraction estimate {contraction:?}"
    )]
    OuterNonConvergence {
        iterations: usize,
        last_step: f64,
        contraction: Option<f64>,
        /// Max-abs update size per outer iteration, for post-mortems.
        trace: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
