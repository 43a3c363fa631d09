//! Tiny closed menu of coefficient/field expressions used by run
//! configurations. Keeping the menu closed (rather than parsing arbitrary
//! formulas) keeps configs reproducible and auditable.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldExpr {
    /// `constant:v`
    Constant(f64),
    /// `one_plus_x` — `1 + x` (first coordinate)
    OnePlusX,
    /// `x_times_one_minus_x` — `x (1 - x)` (first coordinate)
    XTimesOneMinusX,
}

impl FieldExpr {
    /// Parses the textual form used in config files: `constant:v`,
    /// `one_plus_x`, or `x_times_one_minus_x`.
    pub fn parse(text: &str) -> Result<FieldExpr> {
        let t = text.trim();
        if let Some(v) = t.strip_prefix("constant:") {
            let value: f64 = v.trim().parse().map_err(|_| Error::InvalidParameter {
                name: "field expression".into(),
                message: format!("bad constant value '{v}'"),
            })?;
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "field expression".into(),
                    message: format!("constant must be finite, got {value}"),
                });
            }
            return Ok(FieldExpr::Constant(value));
        }
        match t {
            "one_plus_x" => Ok(FieldExpr::OnePlusX),
            "x_times_one_minus_x" => Ok(FieldExpr::XTimesOneMinusX),
            other => Err(Error::InvalidParameter {
                name: "field expression".into(),
                message: format!(
                    "unknown expression '{other}' (expected constant:v, one_plus_x, \
                     or x_times_one_minus_x)"
                ),
            }),
        }
    }

    /// Canonical textual form (round-trips through [`FieldExpr::parse`]).
    pub fn canonical(&self) -> String {
        match self {
            FieldExpr::Constant(v) => format!("constant:{v}"),
            FieldExpr::OnePlusX => "one_plus_x".into(),
            FieldExpr::XTimesOneMinusX => "x_times_one_minus_x".into(),
        }
    }

    pub fn materialize(&self, grid: &Grid) -> ScalarField {
        match *self {
            FieldExpr::Constant(v) => ScalarField::constant(grid, v),
            FieldExpr::OnePlusX => ScalarField::from_fn(grid, |x| 1.0 + x[0]),
            FieldExpr::XTimesOneMinusX => ScalarField::from_fn(grid, |x| x[0] * (1.0 - x[0])),
        }
    }
}
