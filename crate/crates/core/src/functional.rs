//! Problem definition and the functional `G` with its Frechet derivative.
//!
//! Two backends expose the same interface:
//!
//! * `LinearPde`: `G(w) = integral phi * (u_w - u_0)`, where `u_w` solves
//!   `-div(a0 exp(-w) grad u) = f` with zero Dirichlet data. The derivative
//!   is assembled by the adjoint method: with `g_w` solving the (self-adjoint)
//!   problem with right-hand side `phi`, the discrete system is
//!   differentiated edge by edge through the harmonic coefficient means, so
//!   the reported derivative is that of the discretized functional exactly —
//!   not an `O(h^2)`-inconsistent discretization of the continuum formula
//!   `a_w grad(g_w) . grad(u_w)`, to which it converges under refinement.
//!   Forward and adjoint solves share one factorization per `w`.
//! * `ExpIntegral`: `G(w) = integral exp(w + mu) - integral exp(mu)`, with
//!   the closed-form derivative `G'[w] = exp(w + mu)`. This backend needs no
//!   PDE solve and serves as a fast, independently checkable reference.
//!
//! Both are normalized so `G(0) = 0` exactly. A problem is rejected at
//! construction when `G'[0]` is numerically zero (nothing to optimize) —
//! max-abs above `1e-12` is required.

use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::pde::EllipticOperator;

#[derive(Debug, Clone)]
pub enum FunctionalSpec {
    /// Integral functional of the PDE solution with weight `phi`.
    LinearPde { weight: ScalarField },
    /// Closed-form exponential integral with offset field `mu`.
    ExpIntegral { mu: ScalarField },
}

/// Unperturbed PDE data for the `LinearPde` backend.
#[derive(Debug, Clone)]
pub struct PdeCoefficients {
    pub a0: ScalarField,
    pub f: ScalarField,
}

/// Value and derivative of `G` at one field, plus the PDE solutions that
/// produced them (absent for the closed-form backend).
#[derive(Debug, Clone)]
pub struct GEvaluation {
    pub value: f64,
    pub derivative: ScalarField,
    pub u_w: Option<ScalarField>,
    pub g_w: Option<ScalarField>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    grid: Grid,
    covariance: CovarianceModel,
    functional: FunctionalSpec,
    pde: Option<PdeCoefficients>,
    /// `integral exp(mu)` cached so `G(0) = 0` holds exactly (ExpIntegral).
    mu_integral: f64,
    u0: Option<ScalarField>,
    g0: Option<ScalarField>,
    gprime0: ScalarField,
    k0: f64,
}

impl Problem {
    /// Validates the pieces, solves the unperturbed problem, and caches
    /// `G'[0]` together with its covariance energy `K(G'[0])`.
    pub fn new(
        grid: Grid,
        covariance: CovarianceModel,
        functional: FunctionalSpec,
        pde: Option<PdeCoefficients>,
    ) -> Result<Problem> {
        if covariance.grid_id() != grid.id() {
            return Err(Error::GridMismatch {
                field_grid: covariance.grid_id(),
                op_grid: grid.id(),
            });
        }
        match &functional {
            FunctionalSpec::LinearPde { weight } => {
                grid.check_binding(weight)?;
                weight.check_finite("functional weight")?;
                if weight.max_abs() == 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "functional.weight".into(),
                        message: "weight field is identically zero".into(),
                    });
                }
                let coeffs = pde.as_ref().ok_or_else(|| Error::InvalidParameter {
                    name: "pde".into(),
                    message: "linear_pde functional requires PDE coefficients".into(),
                })?;
                grid.check_binding(&coeffs.a0)?;
                grid.check_binding(&coeffs.f)?;
                coeffs.f.check_finite("pde right-hand side")?;
            }
            FunctionalSpec::ExpIntegral { mu } => {
                grid.check_binding(mu)?;
                mu.check_finite("exponential offset")?;
                if pde.is_some() {
                    return Err(Error::InvalidParameter {
                        name: "pde".into(),
                        message: "exp_integral functional takes no PDE coefficients".into(),
                    });
                }
            }
        }

        let mut problem = Problem {
            grid,
            covariance,
            functional,
            pde,
            mu_integral: 0.0,
            u0: None,
            g0: None,
            gprime0: ScalarField::from_raw(0, vec![]),
            k0: 0.0,
        };

        match &problem.functional {
            FunctionalSpec::ExpIntegral { mu } => {
                let exp_mu = mu.map(f64::exp);
                exp_mu.check_finite("exp(mu)")?;
                problem.mu_integral = problem.grid.quadrature(&exp_mu)?;
                problem.gprime0 = exp_mu;
            }
            FunctionalSpec::LinearPde { .. } => {
                let zero = ScalarField::constant(&problem.grid, 0.0);
                let eval = frechet_g_unchecked(&problem, &zero)?;
                problem.u0 = eval.u_w;
                problem.g0 = eval.g_w;
                problem.gprime0 = eval.derivative;
            }
        }

        if problem.gprime0.max_abs() <= 1e-12 {
            return Err(Error::DegenerateFunctional(format!(
                "max |G'[0]| = {:e}; the functional does not respond to perturbations \
                 at first order",
                problem.gprime0.max_abs()
            )));
        }
        problem.k0 = problem
            .covariance
            .k_energy(&problem.grid, &problem.gprime0)?;
        Ok(problem)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn covariance(&self) -> &CovarianceModel {
        &self.covariance
    }

    pub fn functional(&self) -> &FunctionalSpec {
        &self.functional
    }

    pub fn pde(&self) -> Option<&PdeCoefficients> {
        self.pde.as_ref()
    }

    /// Unperturbed solution (LinearPde backend only).
    pub fn u0(&self) -> Option<&ScalarField> {
        self.u0.as_ref()
    }

    /// Unperturbed adjoint solution (LinearPde backend only).
    pub fn g0(&self) -> Option<&ScalarField> {
        self.g0.as_ref()
    }

    /// Derivative of `G` at `w = 0`.
    pub fn gprime0(&self) -> &ScalarField {
        &self.gprime0
    }

    /// `K(G'[0])`: covariance energy of the unperturbed derivative.
    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// `G(0)`, which is 0 by normalization.
    pub fn g_at_0(&self) -> f64 {
        0.0
    }
}

/// `G(w)`.
pub fn eval_g(problem: &Problem, w: &ScalarField) -> Result<f64> {
    problem.grid.check_binding(w)?;
    w.check_finite("functional argument")?;
    match &problem.functional {
        FunctionalSpec::ExpIntegral { mu } => {
            let integrand = w.add(mu)?.map(f64::exp);
            integrand.check_finite("exp(w + mu)")?;
            Ok(problem.grid.quadrature(&integrand)? - problem.mu_integral)
        }
        FunctionalSpec::LinearPde { weight } => {
            let (_, _, u_w) = forward_solve(problem, w)?;
            let diff = u_w.sub(problem.u0.as_ref().expect("u0 cached"))?;
            problem.grid.inner_product(weight, &diff)
        }
    }
}

/// `G(w)` together with `G'[w]` (adjoint method for the PDE backend).
pub fn frechet_g(problem: &Problem, w: &ScalarField) -> Result<GEvaluation> {
    problem.grid.check_binding(w)?;
    w.check_finite("functional argument")?;
    frechet_g_unchecked(problem, w)
}

/// Shared with `Problem::new`, where `u0` is not yet cached: the baseline
/// value is 0 by normalization in that case.
fn frechet_g_unchecked(problem: &Problem, w: &ScalarField) -> Result<GEvaluation> {
    match &problem.functional {
        FunctionalSpec::ExpIntegral { mu } => {
            let integrand = w.add(mu)?.map(f64::exp);
            integrand.check_finite("exp(w + mu)")?;
            let value = problem.grid.quadrature(&integrand)? - problem.mu_integral;
            Ok(GEvaluation {
                value,
                derivative: integrand,
                u_w: None,
                g_w: None,
            })
        }
        FunctionalSpec::LinearPde { weight } => {
            let (a_w, op, u_w) = forward_solve(problem, w)?;
            let g_w = op.solve(&problem.grid, weight)?;
            let derivative = discrete_adjoint_derivative(&problem.grid, &a_w, &u_w, &g_w);
            derivative.check_finite("G'[w]")?;
            let value = match problem.u0.as_ref() {
                Some(u0) => problem.grid.inner_product(weight, &u_w.sub(u0)?)?,
                None => 0.0,
            };
            Ok(GEvaluation {
                value,
                derivative,
                u_w: Some(u_w),
                g_w: Some(g_w),
            })
        }
    }
}

/// Riesz representative (under the grid quadrature) of the exact derivative
/// of the discretized functional `w -> <phi, u_w - u0>`.
///
/// The system matrix depends on `w` only through the edge coefficients
/// `harmonic(a_i, a_j) / h^2` with `a = a0 exp(-w)`, and the quadrature
/// weight is uniform (`volume = prod h`) on interior nodes, so the
/// mass-weighted adjoint state is exactly `volume * g_w`. Differentiating
/// the harmonic mean gives, per grid edge,
///
/// ```text
/// dG/dw_i += s a_j,  dG/dw_j += s a_i,
/// s = volume (g_i - g_j)(u_i - u_j) / h^2 * 2 a_i a_j / (a_i + a_j)^2,
/// ```
///
/// and dividing the accumulated gradient by the quadrature weights yields a
/// field whose quadrature pairing with any direction equals the directional
/// derivative of the computed `G` to solver accuracy. Edges joining two
/// boundary nodes never enter the system and contribute nothing.
fn discrete_adjoint_derivative(
    grid: &Grid,
    a_w: &ScalarField,
    u_w: &ScalarField,
    g_w: &ScalarField,
) -> ScalarField {
    let av = a_w.values();
    let uv = u_w.values();
    let gv = g_w.values();
    let volume: f64 = (0..grid.dim()).map(|axis| grid.h(axis)).product();
    let mut accum = vec![0.0; grid.num_nodes()];
    for axis in 0..grid.dim() {
        let stride: usize = (0..axis).map(|k| grid.n(k)).product();
        let scale = volume / (grid.h(axis) * grid.h(axis));
        for flat in 0..grid.num_nodes() {
            if grid.multi_index(flat)[axis] + 1 >= grid.n(axis) {
                continue;
            }
            let nb = flat + stride;
            if grid.is_boundary(flat) && grid.is_boundary(nb) {
                continue;
            }
            let (ai, aj) = (av[flat], av[nb]);
            let s = scale * (gv[flat] - gv[nb]) * (uv[flat] - uv[nb]) * 2.0 * ai * aj
                / ((ai + aj) * (ai + aj));
            accum[flat] += s * aj;
            accum[nb] += s * ai;
        }
    }
    for (c, m) in accum.iter_mut().zip(grid.quad_weights()) {
        *c /= m;
    }
    ScalarField::from_raw(grid.id(), accum)
}

/// Builds `a_w = a0 exp(-w)`, assembles/factors the operator, solves for
/// `u_w`. The operator is returned so the adjoint can reuse the factorization.
fn forward_solve(
    problem: &Problem,
    w: &ScalarField,
) -> Result<(ScalarField, EllipticOperator, ScalarField)> {
    let coeffs = problem.pde.as_ref().expect("LinearPde has coefficients");
    let a_w = coeffs.a0.mul(&w.map(|v| (-v).exp()))?;
    let op = EllipticOperator::new(&problem.grid, &a_w)?;
    let u_w = op.solve(&problem.grid, &coeffs.f)?;
    Ok((a_w, op, u_w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::CovarianceKernel;

    fn unit_problem(n: usize) -> Problem {
        // a0 = 1, f = 1, phi = 1 on (0,1)
        let grid = Grid::new(&[(0.0, 1.0)], &[n]).unwrap();
        let cov = CovarianceModel::assemble(
            &grid,
            CovarianceKernel::SquaredExponential { length_scale: 0.5 },
        )
        .unwrap();
        let weight = ScalarField::constant(&grid, 1.0);
        let a0 = ScalarField::constant(&grid, 1.0);
        let f = ScalarField::constant(&grid, 1.0);
        Problem::new(
            grid,
            cov,
            FunctionalSpec::LinearPde { weight },
            Some(PdeCoefficients { a0, f }),
        )
        .unwrap()
    }

    fn exp_problem(n: usize, l: f64) -> Problem {
        let grid = Grid::new(&[(0.0, 1.0)], &[n]).unwrap();
        let cov = CovarianceModel::assemble(
            &grid,
            CovarianceKernel::SquaredExponential { length_scale: l },
        )
        .unwrap();
        let mu = ScalarField::constant(&grid, 0.0);
        Problem::new(grid, cov, FunctionalSpec::ExpIntegral { mu }, None).unwrap()
    }

    #[test]
    fn unperturbed_derivative_matches_analytic_parabola() {
        // u0 = g0 = x(1-x)/2 exactly (the stencil is exact on quadratics).
        // The derivative of the *discrete* functional then has the closed
        // form ((1-2x)/2)^2 + h^2/4 at interior nodes and ((1-h)/2)^2 at the
        // two boundary nodes: within O(h^2) of the continuum limit
        // ((1-2x)/2)^2 in the interior, O(h) at the boundary, where only a
        // half-edge couples the coefficient to the solution.
        let p = unit_problem(65);
        let grid = p.grid();
        let h = grid.h(0);
        let last = grid.num_nodes() - 1;
        for (i, v) in p.gprime0().values().iter().enumerate() {
            let x = grid.node(i)[0];
            let exact = if i == 0 || i == last {
                ((1.0 - h) / 2.0).powi(2)
            } else {
                ((1.0 - 2.0 * x) / 2.0).powi(2) + h * h / 4.0
            };
            assert!((v - exact).abs() <= 1e-12, "node {i}: {v} vs {exact}");
            let continuum = ((1.0 - 2.0 * x) / 2.0).powi(2);
            let slack = if i == 0 || i == last {
                0.51 * h
            } else {
                0.26 * h * h
            };
            assert!(
                (v - continuum).abs() <= slack,
                "node {i}: {v} vs continuum {continuum}"
            );
        }
        let mid = grid.num_nodes() / 2;
        assert!((p.gprime0().values()[mid] - h * h / 4.0).abs() <= 1e-12);
        let u0 = p.u0().unwrap();
        let g0 = p.g0().unwrap();
        assert_eq!(u0.values(), g0.values());
    }

    #[test]
    fn g_vanishes_at_zero_exactly() {
        let p = unit_problem(33);
        let zero = ScalarField::constant(p.grid(), 0.0);
        assert_eq!(eval_g(&p, &zero).unwrap(), 0.0);
        let q = exp_problem(33, 0.5);
        let zero = ScalarField::constant(q.grid(), 0.0);
        assert_eq!(eval_g(&q, &zero).unwrap(), 0.0);
    }

    #[test]
    fn constant_shift_scales_solution_exponentially() {
        // w = c: a_w = exp(-c) so u_w = exp(c) u0 in closed form, hence
        // G(c) = (exp(c) - 1) * quadrature(u0); the oracle uses the exact
        // nodal parabola independently of the solver
        let p = unit_problem(65);
        let grid = p.grid();
        let u0_exact = ScalarField::from_fn(grid, |x| x[0] * (1.0 - x[0]) / 2.0);
        let q_u0 = grid.quadrature(&u0_exact).unwrap();
        for c in [-0.8, 0.3, 0.7] {
            let w = ScalarField::constant(grid, c);
            let got = eval_g(&p, &w).unwrap();
            let expected = (c.exp() - 1.0) * q_u0;
            assert!(
                (got - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                "c={c}: {got} vs {expected}"
            );
        }
        // and the quadrature itself is within h^2/12 of the exact 1/12
        let h = grid.h(0);
        assert!((q_u0 - 1.0 / 12.0).abs() <= 1.01 * h * h / 12.0);
    }

    #[test]
    fn exp_integral_closed_form() {
        let p = exp_problem(65, 0.5);
        let grid = p.grid();
        for c in [-1.0, 0.25, 1.5] {
            let w = ScalarField::constant(grid, c);
            let got = eval_g(&p, &w).unwrap();
            let expected = c.exp() - 1.0;
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            let eval = frechet_g(&p, &w).unwrap();
            for v in eval.derivative.values() {
                assert!((v - c.exp()).abs() <= 1e-14 * c.exp());
            }
            assert!(eval.u_w.is_none() && eval.g_w.is_none());
        }
    }

    #[test]
    fn degenerate_functional_is_rejected() {
        // f = 0 forces u0 = 0, so G'[0] = 0 identically
        let grid = Grid::new(&[(0.0, 1.0)], &[17]).unwrap();
        let cov = CovarianceModel::assemble(
            &grid,
            CovarianceKernel::SquaredExponential { length_scale: 0.5 },
        )
        .unwrap();
        let weight = ScalarField::constant(&grid, 1.0);
        let a0 = ScalarField::constant(&grid, 1.0);
        let f = ScalarField::constant(&grid, 0.0);
        let err = Problem::new(
            grid,
            cov,
            FunctionalSpec::LinearPde { weight },
            Some(PdeCoefficients { a0, f }),
        );
        assert!(matches!(err, Err(Error::DegenerateFunctional(_))));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let grid = Grid::new(&[(0.0, 1.0)], &[17]).unwrap();
        let cov = CovarianceModel::assemble(
            &grid,
            CovarianceKernel::SquaredExponential { length_scale: 0.5 },
        )
        .unwrap();
        let weight = ScalarField::constant(&grid, 0.0);
        let a0 = ScalarField::constant(&grid, 1.0);
        let f = ScalarField::constant(&grid, 1.0);
        let err = Problem::new(
            grid,
            cov,
            FunctionalSpec::LinearPde { weight },
            Some(PdeCoefficients { a0, f }),
        );
        assert!(err.is_err());
    }

    #[test]
    fn adjoint_derivative_positive_mean_response() {
        // increasing w softens the material and raises u, so G'[0] >= 0
        let p = unit_problem(33);
        assert!(p.gprime0().values().iter().all(|&v| v >= -1e-14));
        assert!(p.k0() > 0.0);
    }
}
