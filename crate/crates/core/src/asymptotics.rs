//! Sharp small-noise tail approximation assembled from the optimizer output.
//!
//! For the event `{G(sigma xi) > kappa sigma^alpha}` the approximation reads
//!
//! ```text
//! P ~ c1 * sigma^(1 - alpha) * exp(-K*/2),
//! c1 = kappa^{-1} sqrt(K(G'[0]) / (2 pi)),
//! ```
//!
//! with `K*` the constrained minimum energy computed by [`solve_kkt`]. The
//! probability is assembled in log space so extreme regimes (`sigma` down to
//! `1e-3` and far beyond) stay finite, and only then exponentiated.
//!
//! [`solve_kkt`]: crate::optimizer::solve_kkt

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::functional::Problem;
use crate::optimizer::{AsymptoticParams, KktSolution};

/// Everything needed to report one tail estimate.
#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    pub sigma: f64,
    pub alpha: f64,
    pub kappa: f64,
    /// Threshold `kappa sigma^alpha`.
    pub b: f64,
    /// Constrained minimum energy `K*`.
    pub k_star: f64,
    /// Prefactor `kappa^{-1} sqrt(K(G'[0]) / (2 pi))`.
    pub c1: f64,
    /// `ln c1 + (1 - alpha) ln sigma - K*/2`, never clamped.
    pub log_probability: f64,
    /// `exp(log_probability)` clamped to `[0, 1]`.
    pub probability: f64,
    pub trust_region_ok: bool,
    /// Diagonal jitter the covariance factorization needed, for provenance.
    pub jitter: f64,
}

/// Prefactor `c1 = kappa^{-1} sqrt(k0 / (2 pi))` where `k0 = K(G'[0])`.
pub fn prefactor_c1(k0: f64, kappa: f64) -> Result<f64> {
    if !(k0.is_finite() && k0 > 0.0) {
        return Err(Error::DegenerateFunctional(format!(
            "covariance energy of G'[0] is {k0}; the prefactor is undefined"
        )));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidParameter {
            name: "kappa".into(),
            message: format!("prefactor requires a positive threshold scale, got {kappa}"),
        });
    }
    Ok((k0 / (2.0 * PI)).sqrt() / kappa)
}

/// Combines the optimizer output into the tail approximation.
pub fn tail_probability(
    problem: &Problem,
    params: &AsymptoticParams,
    solution: &KktSolution,
) -> Result<TailEstimate> {
    let c1 = prefactor_c1(problem.k0(), params.kappa)?;
    if !(solution.k_star.is_finite() && solution.k_star >= 0.0) {
        return Err(Error::NegativeEnergy {
            value: solution.k_star,
        });
    }
    let log_probability =
        c1.ln() + (1.0 - params.alpha) * params.sigma.ln() - 0.5 * solution.k_star;
    if log_probability.is_nan() {
        return Err(Error::NonFinite {
            context: "log tail probability".into(),
            node: None,
        });
    }
    let probability = log_probability.exp().min(1.0);
    Ok(TailEstimate {
        sigma: params.sigma,
        alpha: params.alpha,
        kappa: params.kappa,
        b: params.b,
        k_star: solution.k_star,
        c1,
        log_probability,
        probability,
        trust_region_ok: solution.trust_region_ok,
        jitter: problem.covariance().jitter(),
    })
}
