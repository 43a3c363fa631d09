//! Dense covariance models on a grid: kernel matrix assembly, Cholesky
//! factorization with a jitter ladder, the discretized integral operator
//! `(C w)(x) = integral C(x,y) w(y) dy`, the energy quadratic form
//! `K(w) = <w, C w>`, and Gaussian field sampling.
//!
//! The kernel matrix `C` is assembled exactly symmetric with unit diagonal.
//! Factorization works on `C + jitter * I`, escalating the jitter through
//! `{0, 1e-12, 1e-10, 1e-8, 1e-6}` until the factor both exists (positive
//! pivots) and reproduces the matrix to 1e-10 relative Frobenius error; the
//! applied jitter is recorded and reported. Only sampling sees the jitter:
//! `apply_c` and `k_energy` use the raw kernel matrix, while samples have
//! covariance `C + jitter * I` (nodal variance `1 + jitter`).
//!
//! Kernel smoothness note: squared-exponential paths are smooth, so
//! derivative-level diagnostics (`k = 1`) are legitimate; exponential-kernel
//! paths are Holder continuous but not differentiable, so only `k = 0`
//! diagnostics are meaningful. [`CovarianceKernel::recommended_holder`]
//! encodes that choice.

use crate::error::{Error, Result};
use crate::field::{HolderParams, ScalarField};
use crate::grid::Grid;
use crate::linalg::{dense_cholesky, dense_lower_matvec};
use rand::Rng;
use rand_distr::StandardNormal;

const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceKernel {
    /// `exp(-|x - y|^2 / (2 l^2))`
    SquaredExponential { length_scale: f64 },
    /// `exp(-|x - y| / l)`
    Exponential { length_scale: f64 },
}

impl CovarianceKernel {
    pub fn length_scale(&self) -> f64 {
        match *self {
            CovarianceKernel::SquaredExponential { length_scale } => length_scale,
            CovarianceKernel::Exponential { length_scale } => length_scale,
        }
    }

    fn evaluate_dist2(&self, dist2: f64) -> f64 {
        match *self {
            CovarianceKernel::SquaredExponential { length_scale } => {
                (-dist2 / (2.0 * length_scale * length_scale)).exp()
            }
            CovarianceKernel::Exponential { length_scale } => (-dist2.sqrt() / length_scale).exp(),
        }
    }

    /// Holder parameters appropriate for paths of this kernel.
    pub fn recommended_holder(&self) -> HolderParams {
        match self {
            CovarianceKernel::SquaredExponential { .. } => HolderParams { k: 1, beta: 0.5 },
            CovarianceKernel::Exponential { .. } => HolderParams { k: 0, beta: 0.5 },
        }
    }
}

#[derive(Debug, Clone)]
pub struct CovarianceModel {
    grid_id: u64,
    n: usize,
    kernel: CovarianceKernel,
    /// Full symmetric kernel matrix, row-major.
    matrix: Vec<f64>,
    /// Dense lower Cholesky factor of `matrix + jitter * I`.
    factor: Vec<f64>,
    jitter: f64,
}

impl CovarianceModel {
    /// Assembles and factors the kernel matrix on `grid`.
    pub fn assemble(grid: &Grid, kernel: CovarianceKernel) -> Result<CovarianceModel> {
        let l = kernel.length_scale();
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kernel.length_scale".into(),
                message: format!("must be finite and > 0, got {l}"),
            });
        }
        let n = grid.num_nodes();
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            matrix[i * n + i] = 1.0;
            let xi = grid.node(i);
            for j in (i + 1)..n {
                let xj = grid.node(j);
                let dist2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                let v = kernel.evaluate_dist2(dist2);
                matrix[i * n + j] = v;
                matrix[j * n + i] = v;
            }
        }

        let mut last_pivot = 0;
        for &jitter in &JITTER_LADDER {
            let mut shifted = matrix.clone();
            for i in 0..n {
                shifted[i * n + i] += jitter;
            }
            match dense_cholesky(n, &shifted) {
                Ok(factor) => {
                    if factor_reproduces(n, &factor, &shifted, 1e-10) {
                        return Ok(CovarianceModel {
                            grid_id: grid.id(),
                            n,
                            kernel,
                            matrix,
                            factor,
                            jitter,
                        });
                    }
                    last_pivot = n; // factor exists but is inaccurate
                }
                Err(pivot) => last_pivot = pivot,
            }
        }
        Err(Error::FactorizationFailed {
            jitter: *JITTER_LADDER.last().unwrap(),
            pivot: last_pivot,
        })
    }

    pub fn kernel(&self) -> CovarianceKernel {
        self.kernel
    }

    /// Jitter actually applied to make the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn matrix_entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.id() != self.grid_id {
            return Err(Error::GridMismatch {
                field_grid: self.grid_id,
                op_grid: grid.id(),
            });
        }
        Ok(())
    }

    /// Discretized integral operator: `(C w)_i = sum_j C_ij q_j w_j` with the
    /// trapezoid weights `q`.
    pub fn apply_c(&self, grid: &Grid, w: &ScalarField) -> Result<ScalarField> {
        self.check_grid(grid)?;
        grid.check_binding(w)?;
        let q = grid.quad_weights();
        let t: Vec<f64> = q.iter().zip(w.values()).map(|(qj, wj)| qj * wj).collect();
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.matrix[i * self.n..(i + 1) * self.n];
            let mut s = 0.0;
            for (cij, tj) in row.iter().zip(&t) {
                s += cij * tj;
            }
            *yi = s;
        }
        Ok(ScalarField::from_raw(self.grid_id, y))
    }

    /// Energy quadratic form `K(w) = <w, C w>` under trapezoid quadrature.
    /// Clamped to 0 when roundoff drives a near-null direction slightly
    /// negative; a genuinely negative value (beyond `-1e-12`, scaled by the
    /// squared field magnitude) reports a broken kernel.
    pub fn k_energy(&self, grid: &Grid, w: &ScalarField) -> Result<f64> {
        let cw = self.apply_c(grid, w)?;
        let value = grid.inner_product(w, &cw)?;
        if value >= 0.0 {
            return Ok(value);
        }
        let tol = 1e-12 * 1.0_f64.max(w.max_abs() * w.max_abs());
        if value >= -tol {
            Ok(0.0)
        } else {
            Err(Error::NegativeEnergy { value })
        }
    }

    /// Draws one mean-zero Gaussian field with covariance
    /// `matrix + jitter * I`: `n` standard normals in node order, then the
    /// lower-triangular factor applied. Deterministic given the RNG state.
    pub fn sample(&self, grid: &Grid, rng: &mut impl Rng) -> Result<ScalarField> {
        self.check_grid(grid)?;
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        let y = dense_lower_matvec(self.n, &self.factor, &z);
        Ok(ScalarField::from_raw(self.grid_id, y))
    }
}

/// Checks `|| L L^T - A ||_F <= tol * || A ||_F`.
fn factor_reproduces(n: usize, l: &[f64], a: &[f64], tol: f64) -> bool {
    let mut err2 = 0.0;
    let mut norm2 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..=j {
                s += l[i * n + k] * l[j * n + k];
            }
            let d = s - a[i * n + j];
            let w = if i == j { 1.0 } else { 2.0 };
            err2 += w * d * d;
            norm2 += w * a[i * n + j] * a[i * n + j];
        }
    }
    err2.sqrt() <= tol * norm2.sqrt()
}
