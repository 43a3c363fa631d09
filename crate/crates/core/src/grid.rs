//! Tensor-product grids with trapezoid quadrature.
//!
//! Nodes are ordered lexicographically with axis 0 varying fastest: in 2-D
//! the flat index of `(i0, i1)` is `i0 + i1 * n0`. Quadrature weights are the
//! tensor product of 1-D trapezoid weights (`h/2` at the two ends, `h`
//! inside). All weights are strictly positive, which is what keeps the
//! discretized covariance quadratic form positive semidefinite, and they sum
//! to the domain measure up to roundoff.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct Grid {
    id: u64,
    dim: usize,
    bounds: Vec<(f64, f64)>,
    n: Vec<usize>,
    h: Vec<f64>,
    /// Node coordinates; axes beyond `dim` are 0.
    nodes: Vec<[f64; 2]>,
    quad_weights: Vec<f64>,
}

impl Grid {
    /// Builds a 1-D or 2-D tensor-product grid with `n[axis]` nodes per axis
    /// (at least 3, so that interior nodes exist and one-sided second-order
    /// stencils fit).
    pub fn new(bounds: &[(f64, f64)], n: &[usize]) -> Result<Grid> {
        let dim = bounds.len();
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "bounds describe {dim} axes but n describes {}",
                n.len()
            )));
        }
        for (axis, (&(lo, hi), &na)) in bounds.iter().zip(n.iter()).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: bounds ({lo}, {hi}) must be finite with lo < hi"
                )));
            }
            if na < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: need at least 3 nodes, got {na}"
                )));
            }
        }

        let h: Vec<f64> = bounds
            .iter()
            .zip(n.iter())
            .map(|(&(lo, hi), &na)| (hi - lo) / (na - 1) as f64)
            .collect();

        // Per-axis coordinates; the endpoints are pinned exactly.
        let axis_coords: Vec<Vec<f64>> = bounds
            .iter()
            .zip(n.iter().zip(h.iter()))
            .map(|(&(lo, hi), (&na, &ha))| {
                let mut c: Vec<f64> = (0..na).map(|k| lo + k as f64 * ha).collect();
                c[na - 1] = hi;
                c
            })
            .collect();

        let axis_weights: Vec<Vec<f64>> = n
            .iter()
            .zip(h.iter())
            .map(|(&na, &ha)| {
                (0..na)
                    .map(|k| if k == 0 || k == na - 1 { ha / 2.0 } else { ha })
                    .collect()
            })
            .collect();

        let num_nodes: usize = n.iter().product();
        let mut nodes = Vec::with_capacity(num_nodes);
        let mut quad_weights = Vec::with_capacity(num_nodes);
        for flat in 0..num_nodes {
            let i0 = flat % n[0];
            let mut coord = [0.0_f64; 2];
            coord[0] = axis_coords[0][i0];
            let mut w = axis_weights[0][i0];
            if dim == 2 {
                let i1 = flat / n[0];
                coord[1] = axis_coords[1][i1];
                w *= axis_weights[1][i1];
            }
            nodes.push(coord);
            quad_weights.push(w);
        }

        Ok(Grid {
            id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
            dim,
            bounds: bounds.to_vec(),
            n: n.to_vec(),
            h,
            nodes,
            quad_weights,
        })
    }

    /// Identifier used to bind fields to the grid they were built on.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        self.bounds[axis]
    }

    /// Product of the axis extents.
    pub fn measure(&self) -> f64 {
        self.bounds.iter().map(|&(lo, hi)| hi - lo).product()
    }

    /// Coordinates of a node (length = `dim`).
    pub fn node(&self, flat: usize) -> &[f64] {
        &self.nodes[flat][..self.dim]
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Decomposes a flat index; the second component is 0 in 1-D.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        [flat % self.n[0], flat / self.n[0]]
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        idx[0] + idx[1] * self.n[0]
    }

    /// True when the node lies on the domain boundary.
    pub fn is_boundary(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim).any(|axis| idx[axis] == 0 || idx[axis] == self.n[axis] - 1)
    }

    pub(crate) fn check_binding(&self, field: &ScalarField) -> Result<()> {
        if field.grid_id() != self.id {
            return Err(Error::GridMismatch {
                field_grid: field.grid_id(),
                op_grid: self.id,
            });
        }
        Ok(())
    }

    /// Trapezoid approximation of the integral of `field` over the domain.
    pub fn quadrature(&self, field: &ScalarField) -> Result<f64> {
        self.check_binding(field)?;
        let mut acc = 0.0;
        for (w, v) in self.quad_weights.iter().zip(field.values()) {
            acc += w * v;
        }
        Ok(acc)
    }

    /// Quadrature-weighted L2 inner product of two fields.
    pub fn inner_product(&self, v: &ScalarField, w: &ScalarField) -> Result<f64> {
        self.check_binding(v)?;
        self.check_binding(w)?;
        let mut acc = 0.0;
        for ((q, a), b) in self.quad_weights.iter().zip(v.values()).zip(w.values()) {
            acc += q * a * b;
        }
        Ok(acc)
    }
}
