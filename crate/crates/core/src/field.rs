//! Nodal scalar fields, discrete gradients, and Holder-type diagnostic norms.
//!
//! A [`ScalarField`] is a vector of nodal values bound to the grid it was
//! built on; every consumer checks the binding, so mixing grids is an error
//! rather than silent nonsense.
//!
//! [`holder_norm`] is a discrete surrogate for the C^{k,beta} norm used as a
//! trust-region diagnostic by the optimizer. Convention: the norm is the
//! largest of the nodal sup-norms of the field and (for `k = 1`) its
//! gradient components, together with — when `beta > 0` — the largest
//! difference quotient `|g(x) - g(y)| / |x - y|^beta` of the top-order
//! derivatives over node pairs. The max combination makes `(k=0, beta=0)`
//! coincide exactly with the max-abs of nodal values. Above 4096 nodes the
//! pair maximum is taken over the deterministic subsample of pairs
//! `(i, i + s)` for strides `s = 1, 2, 4, ...`; it is a diagnostic, not a
//! quantity that feeds back into the computation.

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid_id: u64,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wraps nodal values, validating length and finiteness.
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidParameter {
                name: "field values".into(),
                message: format!(
                    "expected {} nodal values, got {}",
                    grid.num_nodes(),
                    values.len()
                ),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "field construction".into(),
                node: Some(node),
            });
        }
        Ok(ScalarField {
            grid_id: grid.id(),
            values,
        })
    }

    pub fn constant(grid: &Grid, c: f64) -> ScalarField {
        ScalarField {
            grid_id: grid.id(),
            values: vec![c; grid.num_nodes()],
        }
    }

    /// Evaluates `f` at every node coordinate.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> ScalarField {
        let values = (0..grid.num_nodes()).map(|i| f(grid.node(i))).collect();
        ScalarField {
            grid_id: grid.id(),
            values,
        }
    }

    /// Internal constructor for values produced by trusted arithmetic.
    pub(crate) fn from_raw(grid_id: u64, values: Vec<f64>) -> ScalarField {
        ScalarField { grid_id, values }
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Errors if any entry is non-finite; `context` names the producer.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        if let Some(node) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: context.into(),
                node: Some(node),
            });
        }
        Ok(())
    }

    fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid_id != other.grid_id {
            return Err(Error::GridMismatch {
                field_grid: other.grid_id,
                op_grid: self.grid_id,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ScalarField::from_raw(self.grid_id, values))
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ScalarField::from_raw(self.grid_id, values))
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(ScalarField::from_raw(self.grid_id, values))
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        ScalarField::from_raw(self.grid_id, self.values.iter().map(|v| c * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(self.grid_id, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Max-abs of the difference; the usual convergence metric for iterates.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Serializes the field as CSV: coordinates first, then the value, one
    /// row per node in flat node order, with a header line.
    pub fn to_csv(&self, grid: &Grid) -> Result<String> {
        grid.check_binding(self)?;
        let mut out = String::new();
        out.push_str(match grid.dim() {
            1 => "x,value\n",
            _ => "x,y,value\n",
        });
        for (i, v) in self.values.iter().enumerate() {
            for c in grid.node(i) {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!("{v}\n"));
        }
        Ok(out)
    }
}

/// Parameters of the discrete C^{k,beta} surrogate norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderParams {
    /// Number of derivative levels included (0 or 1).
    pub k: u8,
    /// Holder exponent of the top-order difference quotients, in [0, 1).
    pub beta: f64,
}

impl HolderParams {
    pub fn new(k: u8, beta: f64) -> Result<HolderParams> {
        if k > 1 {
            return Err(Error::InvalidParameter {
                name: "holder.k".into(),
                message: format!("supported derivative orders are 0 and 1, got {k}"),
            });
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter {
                name: "holder.beta".into(),
                message: format!("beta must lie in [0, 1), got {beta}"),
            });
        }
        Ok(HolderParams { k, beta })
    }
}

/// Discrete gradient, one field per axis.
///
/// Interior nodes use central differences; boundary nodes use one-sided
/// second-order stencils, so the result is exact for fields affine in each
/// coordinate and second-order accurate otherwise.
pub fn gradient(grid: &Grid, field: &ScalarField) -> Result<Vec<ScalarField>> {
    grid.check_binding(field)?;
    let v = field.values();
    let mut out = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let n_axis = grid.n(axis);
        let stride = if axis == 0 { 1 } else { grid.n(0) };
        let two_h = 2.0 * grid.h(axis);
        let mut d = vec![0.0; v.len()];
        for flat in 0..v.len() {
            let k = grid.multi_index(flat)[axis];
            d[flat] = if k == 0 {
                (-3.0 * v[flat] + 4.0 * v[flat + stride] - v[flat + 2 * stride]) / two_h
            } else if k == n_axis - 1 {
                (3.0 * v[flat] - 4.0 * v[flat - stride] + v[flat - 2 * stride]) / two_h
            } else {
                (v[flat + stride] - v[flat - stride]) / two_h
            };
        }
        out.push(ScalarField::from_raw(field.grid_id(), d));
    }
    Ok(out)
}

/// Largest difference quotient |g_i - g_j| / |x_i - x_j|^beta over node
/// pairs: all pairs up to 4096 nodes, the documented stride subsample above.
fn pair_seminorm(grid: &Grid, values: &[f64], beta: f64) -> f64 {
    let n = values.len();
    let dist = |i: usize, j: usize| -> f64 {
        let a = grid.node(i);
        let b = grid.node(j);
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let mut best = 0.0_f64;
    if n <= 4096 {
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max((values[i] - values[j]).abs() / dist(i, j).powf(beta));
            }
        }
    } else {
        let mut s = 1;
        while s < n {
            for i in 0..(n - s) {
                let j = i + s;
                best = best.max((values[i] - values[j]).abs() / dist(i, j).powf(beta));
            }
            s *= 2;
        }
    }
    best
}

/// Discrete C^{k,beta} surrogate norm (see the module docs for the exact
/// convention). Diagnostic only: with `(k=0, beta=0)` it equals the nodal
/// max-abs exactly.
pub fn holder_norm(grid: &Grid, field: &ScalarField, params: HolderParams) -> Result<f64> {
    grid.check_binding(field)?;
    let mut best = field.max_abs();
    let top: Vec<ScalarField> = if params.k == 1 {
        let grads = gradient(grid, field)?;
        for g in &grads {
            best = best.max(g.max_abs());
        }
        grads
    } else {
        vec![field.clone()]
    };
    if params.beta > 0.0 {
        for g in &top {
            best = best.max(pair_seminorm(grid, g.values(), params.beta));
        }
    }
    Ok(best)
}
