use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{MonotoneOp, Orthogonal};
use crate::error::{invalid, Result};

/// JSON description of one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Zero { dim: usize },
    AffineLinear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    SkewRotation2d { kappa: f64, dim: usize },
    L1Offset { dim: usize, mask: Vec<usize>, offset: Vec<f64>, weight: f64 },
    UnitaryL1 { transform: TransformSpec, offset: Vec<f64>, weight: f64 },
    IndicatorNonneg { dim: usize },
    IndicatorSimplex { dim: usize },
    IndicatorHalfspace { normal: Vec<f64>, bound: f64 },
    QuadraticLs { rows: Vec<Vec<f64>>, target: f64 },
    PoissonNll { counts: Vec<f64>, weight: f64 },
    NormalConeZero { dim: usize },
    PairTv { dim: usize, first: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformSpec {
    Haar,
    Dense(Vec<Vec<f64>>),
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(invalid("matrix rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl OperatorSpec {
    pub fn build(&self) -> Result<MonotoneOp> {
        let v = |x: &Vec<f64>| DVector::from_column_slice(x);
        match self {
            OperatorSpec::Zero { dim } => MonotoneOp::zero(*dim),
            OperatorSpec::AffineLinear { matrix, offset } => {
                MonotoneOp::affine(matrix_from_rows(matrix)?, v(offset))
            }
            OperatorSpec::SkewRotation2d { kappa, dim } => MonotoneOp::skew_rotation(*kappa, *dim),
            OperatorSpec::L1Offset { dim, mask, offset, weight } => {
                MonotoneOp::l1_offset(*dim, mask.clone(), v(offset), *weight)
            }
            OperatorSpec::UnitaryL1 { transform, offset, weight } => {
                let u = match transform {
                    TransformSpec::Haar => Orthogonal::haar(offset.len())?,
                    TransformSpec::Dense(rows) => Orthogonal::dense(matrix_from_rows(rows)?)?,
                };
                MonotoneOp::unitary_l1(u, v(offset), *weight)
            }
            OperatorSpec::IndicatorNonneg { dim } => MonotoneOp::indicator_nonneg(*dim),
            OperatorSpec::IndicatorSimplex { dim } => MonotoneOp::indicator_simplex(*dim),
            OperatorSpec::IndicatorHalfspace { normal, bound } => {
                MonotoneOp::indicator_halfspace(v(normal), *bound)
            }
            OperatorSpec::QuadraticLs { rows, target } => {
                MonotoneOp::quadratic_ls(matrix_from_rows(rows)?, *target)
            }
            OperatorSpec::PoissonNll { counts, weight } => MonotoneOp::poisson_nll(v(counts), *weight),
            OperatorSpec::NormalConeZero { dim } => MonotoneOp::normal_cone_zero(*dim),
            OperatorSpec::PairTv { dim, first } => MonotoneOp::pair_tv(*dim, *first),
        }
    }
}
