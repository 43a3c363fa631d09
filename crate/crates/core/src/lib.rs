//! Sharp small-noise tail estimates for functionals of elliptic PDEs with
//! lognormal random coefficients.
//!
//! The library estimates probabilities of the form `P{ G(sigma * xi) > b }`,
//! where `xi` is a mean-zero Gaussian random field with unit-variance
//! covariance kernel, `G` is a smooth functional (either an integral
//! functional of the solution of `-div(a0 * exp(-w) grad u) = f`, or a
//! closed-form exponential integral used as a fast reference backend), and
//! the threshold `b = kappa * sigma^alpha` grows relative to the noise as
//! `sigma -> 0` for `alpha` in (0,1).
//!
//! Three routes to the same number are provided and kept deliberately
//! independent so they can cross-check each other:
//!
//! * [`optimizer`] solves the constrained problem `min K(xi)` subject to
//!   `G(sigma C xi) = b` by a nested fixed-point iteration on the KKT system
//!   and returns the dominant point `xi*` with its energy `K* = K(xi*)`.
//! * [`asymptotics`] turns `K*` into the closed-form tail approximation
//!   `c1 * sigma^(1-alpha) * exp(-K*/2)` with an analytic prefactor.
//! * [`mc`] estimates the same probability by crude Monte Carlo and by
//!   importance sampling centered at the dominant point, with exact
//!   likelihood-ratio weights.
//!
//! Supporting modules: [`grid`] (tensor-product grids and trapezoid
//! quadrature), [`field`] (nodal scalar fields, gradients, Holder-type
//! diagnostic norms), [`covariance`] (dense kernel matrices, factorization,
//! sampling), [`pde`] (finite-difference elliptic solver), [`functional`]
//! (problem definition and Frechet derivatives via the adjoint method).

pub mod asymptotics;
pub mod covariance;
pub mod error;
pub mod expr;
pub mod field;
pub mod functional;
pub mod grid;
mod linalg;
pub mod mc;
pub mod optimizer;
pub mod pde;

pub use crate::asymptotics::{prefactor_c1, tail_probability, TailEstimate};
pub use crate::covariance::{CovarianceKernel, CovarianceModel};
pub use crate::error::{Error, Result};
pub use crate::expr::FieldExpr;
pub use crate::field::{gradient, holder_norm, HolderParams, ScalarField};
pub use crate::functional::{
    eval_g, frechet_g, FunctionalSpec, GEvaluation, PdeCoefficients, Problem,
};
pub use crate::grid::Grid;
pub use crate::mc::{
    crude_mc, importance_sampling, likelihood_ratio, McConfig, McEstimate, McMethod, McRun,
    SampleRecord,
};
pub use crate::optimizer::{
    first_order_xi, lambda_fixed_point, solve_kkt, t_map, xi_map, AsymptoticParams, KktSolution,
    OptimizerOptions,
};
pub use crate::pde::EllipticOperator;
