//! Maximal monotone operators, accessed through their resolvents.
//!
//! Every splitting in this crate touches an operator only via
//! `resolvent(step, z) = (I + step * A)^{-1} z`, plus a forward evaluation for
//! the single-valued kinds. Operators are immutable once built; the only
//! interior state is a per-step factorization cache behind a mutex, so an
//! operator can be shared across threads.

mod haar;
mod prox;
mod spec;

use std::sync::{Arc, Mutex};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{check_dim, invalid, Error, Result};

pub use haar::haar_transform;
pub use prox::{poisson_prox, project_halfspace, project_simplex, soft_threshold, tv_pair_prox};
pub use spec::{OperatorSpec, TransformSpec};

/// A point of the ambient space.
pub type Vector = DVector<f64>;

/// Orthogonal transform used by [`MonotoneOp::unitary_l1`].
#[derive(Debug, Clone, PartialEq)]
pub enum Orthogonal {
    /// Full-depth orthonormal Haar wavelet transform.
    Haar { dim: usize },
    /// Explicit orthogonal matrix.
    Dense(DMatrix<f64>),
}

impl Orthogonal {
    pub fn haar(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(dim));
        }
        Ok(Orthogonal::Haar { dim })
    }

    pub fn dense(u: DMatrix<f64>) -> Result<Self> {
        if !u.is_square() {
            return Err(invalid("orthogonal transform must be square"));
        }
        let n = u.nrows();
        let defect = (u.transpose() * &u - DMatrix::identity(n, n)).amax();
        if defect > 1e-10 {
            return Err(invalid(format!("matrix is not orthogonal (defect {defect:e})")));
        }
        Ok(Orthogonal::Dense(u))
    }

    pub fn dim(&self) -> usize {
        match self {
            Orthogonal::Haar { dim } => *dim,
            Orthogonal::Dense(u) => u.nrows(),
        }
    }

    /// `U x`
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match self {
            Orthogonal::Haar { .. } => haar_transform(x, false),
            Orthogonal::Dense(u) => Ok(u * x),
        }
    }

    /// `U^T x`
    pub fn apply_transpose(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match self {
            Orthogonal::Haar { .. } => haar_transform(x, true),
            Orthogonal::Dense(u) => Ok(u.tr_mul(x)),
        }
    }
}

const CACHE_SLOTS: usize = 4;

/// Factorizations keyed by the resolvent step. Steps are compared bitwise.
#[derive(Debug)]
struct StepCache<F> {
    slots: Mutex<Vec<(u64, Arc<F>)>>,
}

impl<F> Default for StepCache<F> {
    fn default() -> Self {
        StepCache { slots: Mutex::new(Vec::new()) }
    }
}

impl<F> StepCache<F> {
    fn get_or_build(&self, step: f64, build: impl FnOnce() -> Result<F>) -> Result<Arc<F>> {
        let key = step.to_bits();
        let mut slots = self.slots.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((_, f)) = slots.iter().find(|(k, _)| *k == key) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(build()?);
        if slots.len() == CACHE_SLOTS {
            slots.remove(0);
        }
        slots.push((key, Arc::clone(&f)));
        Ok(f)
    }
}

#[derive(Debug)]
struct Affine {
    matrix: DMatrix<f64>,
    offset: Vector,
    cache: StepCache<LU<f64, Dyn, Dyn>>,
}

#[derive(Debug)]
struct LeastSquares {
    rows: DMatrix<f64>,
    target: f64,
    /// `A^T (target * 1)`
    rhs: Vector,
    cache: StepCache<Cholesky<f64, Dyn>>,
}

#[derive(Debug)]
enum Kind {
    Zero { dim: usize },
    AffineLinear(Affine),
    SkewRotation2D { kappa: f64, dim: usize },
    L1Offset { dim: usize, mask: Vec<usize>, offset: Vector, weight: f64 },
    UnitaryL1 { transform: Orthogonal, offset: Vector, weight: f64 },
    IndicatorNonneg { dim: usize },
    IndicatorSimplex { dim: usize },
    IndicatorHalfspace { normal: Vector, bound: f64 },
    QuadraticLs(LeastSquares),
    PoissonNll { counts: Vector, weight: f64 },
    NormalConeZero { dim: usize },
    PairTv { dim: usize, first: usize },
}

/// A maximal monotone operator on `R^d`.
#[derive(Debug)]
pub struct MonotoneOp {
    kind: Kind,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{name} has non-finite entries")))
    }
}

fn nonempty(dim: usize) -> Result<usize> {
    if dim == 0 {
        Err(invalid("dimension must be at least 1"))
    } else {
        Ok(dim)
    }
}

impl MonotoneOp {
    fn new(kind: Kind) -> Self {
        MonotoneOp { kind }
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Ok(Self::new(Kind::Zero { dim: nonempty(dim)? }))
    }

    /// `x -> M x + c`. Rejects `M` whose symmetric part has an eigenvalue
    /// below `-1e-10`.
    pub fn affine(matrix: DMatrix<f64>, offset: Vector) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("affine operator needs a square matrix"));
        }
        nonempty(matrix.nrows())?;
        check_dim(matrix.nrows(), offset.len())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        finite("offset", &offset)?;
        let sym = &matrix + matrix.transpose();
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -1e-10 {
            return Err(Error::NotMonotone(min_eig));
        }
        Ok(Self::new(Kind::AffineLinear(Affine { matrix, offset, cache: StepCache::default() })))
    }

    /// Skew map `[[0, kappa], [-kappa, 0]]` on the first two coordinates,
    /// zero on the rest.
    pub fn skew_rotation(kappa: f64, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("skew rotation needs dim >= 2"));
        }
        if !kappa.is_finite() {
            return Err(invalid("kappa must be finite"));
        }
        Ok(Self::new(Kind::SkewRotation2D { kappa, dim }))
    }

    /// Subdifferential of `weight * ||x_S - a||_1`, `S = mask`.
    pub fn l1_offset(dim: usize, mask: Vec<usize>, offset: Vector, weight: f64) -> Result<Self> {
        nonempty(dim)?;
        positive("weight", weight)?;
        check_dim(mask.len(), offset.len())?;
        finite("offset", &offset)?;
        if let Some(&bad) = mask.iter().find(|&&i| i >= dim) {
            return Err(invalid(format!("mask index {bad} out of range for dim {dim}")));
        }
        let mut seen = vec![false; dim];
        for &i in &mask {
            if std::mem::replace(&mut seen[i], true) {
                return Err(invalid(format!("mask index {i} repeated")));
            }
        }
        Ok(Self::new(Kind::L1Offset { dim, mask, offset, weight }))
    }

    /// Subdifferential of `weight * ||U x - b||_1` for orthogonal `U`.
    pub fn unitary_l1(transform: Orthogonal, offset: Vector, weight: f64) -> Result<Self> {
        positive("weight", weight)?;
        check_dim(transform.dim(), offset.len())?;
        finite("offset", &offset)?;
        Ok(Self::new(Kind::UnitaryL1 { transform, offset, weight }))
    }

    pub fn indicator_nonneg(dim: usize) -> Result<Self> {
        Ok(Self::new(Kind::IndicatorNonneg { dim: nonempty(dim)? }))
    }

    pub fn indicator_simplex(dim: usize) -> Result<Self> {
        Ok(Self::new(Kind::IndicatorSimplex { dim: nonempty(dim)? }))
    }

    /// Normal cone of `{x : <normal, x> >= bound}`.
    pub fn indicator_halfspace(normal: Vector, bound: f64) -> Result<Self> {
        nonempty(normal.len())?;
        finite("normal", &normal)?;
        if normal.norm_squared() == 0.0 {
            return Err(invalid("halfspace normal must be nonzero"));
        }
        if !bound.is_finite() {
            return Err(invalid("halfspace bound must be finite"));
        }
        Ok(Self::new(Kind::IndicatorHalfspace { normal, bound }))
    }

    /// Gradient of `(1/2) sum_i (a_i^T x - target)^2`; `rows` holds the `a_i^T`.
    pub fn quadratic_ls(rows: DMatrix<f64>, target: f64) -> Result<Self> {
        nonempty(rows.ncols())?;
        if rows.nrows() == 0 {
            return Err(invalid("least-squares term needs at least one row"));
        }
        if rows.iter().any(|v| !v.is_finite()) || !target.is_finite() {
            return Err(invalid("least-squares data has non-finite entries"));
        }
        let ones = Vector::from_element(rows.nrows(), target);
        let rhs = rows.tr_mul(&ones);
        Ok(Self::new(Kind::QuadraticLs(LeastSquares {
            rows,
            target,
            rhs,
            cache: StepCache::default(),
        })))
    }

    /// Gradient of `weight * sum_i (x_i - y_i log x_i)` (with `y_i = 0`
    /// terms read as `x_i` on `x_i >= 0`).
    pub fn poisson_nll(counts: Vector, weight: f64) -> Result<Self> {
        nonempty(counts.len())?;
        positive("weight", weight)?;
        if counts.iter().any(|&y| !(y >= 0.0 && y.is_finite())) {
            return Err(invalid("Poisson counts must be finite and nonnegative"));
        }
        Ok(Self::new(Kind::PoissonNll { counts, weight }))
    }

    /// Normal cone of `{0}`: its resolvent always returns the origin.
    pub fn normal_cone_zero(dim: usize) -> Result<Self> {
        Ok(Self::new(Kind::NormalConeZero { dim: nonempty(dim)? }))
    }

    /// Subdifferential of `sum_k |x_{first+2k+1} - x_{first+2k}|`, a sum of
    /// absolute differences over disjoint neighbouring pairs.
    pub fn pair_tv(dim: usize, first: usize) -> Result<Self> {
        nonempty(dim)?;
        if first > 1 {
            return Err(invalid("pair TV offset must be 0 or 1"));
        }
        Ok(Self::new(Kind::PairTv { dim, first }))
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::Zero { dim }
            | Kind::SkewRotation2D { dim, .. }
            | Kind::L1Offset { dim, .. }
            | Kind::IndicatorNonneg { dim }
            | Kind::IndicatorSimplex { dim }
            | Kind::NormalConeZero { dim }
            | Kind::PairTv { dim, .. } => *dim,
            Kind::AffineLinear(a) => a.offset.len(),
            Kind::UnitaryL1 { transform, .. } => transform.dim(),
            Kind::IndicatorHalfspace { normal, .. } => normal.len(),
            Kind::QuadraticLs(ls) => ls.rows.ncols(),
            Kind::PoissonNll { counts, .. } => counts.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Zero { .. } => "zero",
            Kind::AffineLinear(_) => "affine_linear",
            Kind::SkewRotation2D { .. } => "skew_rotation_2d",
            Kind::L1Offset { .. } => "l1_offset",
            Kind::UnitaryL1 { .. } => "unitary_l1",
            Kind::IndicatorNonneg { .. } => "indicator_nonneg",
            Kind::IndicatorSimplex { .. } => "indicator_simplex",
            Kind::IndicatorHalfspace { .. } => "indicator_halfspace",
            Kind::QuadraticLs(_) => "quadratic_ls",
            Kind::PoissonNll { .. } => "poisson_nll",
            Kind::NormalConeZero { .. } => "normal_cone_zero",
            Kind::PairTv { .. } => "pair_tv",
        }
    }

    /// True for kinds whose `forward` is defined on the whole domain.
    pub fn is_single_valued(&self) -> bool {
        matches!(
            self.kind,
            Kind::Zero { .. }
                | Kind::AffineLinear(_)
                | Kind::SkewRotation2D { .. }
                | Kind::QuadraticLs(_)
                | Kind::PoissonNll { .. }
        )
    }

    /// `J_{step A}(z) = (I + step A)^{-1} z`.
    pub fn resolvent(&self, step: f64, z: &Vector) -> Result<Vector> {
        positive("resolvent step", step)?;
        check_dim(self.dim(), z.len())?;
        let x = match &self.kind {
            Kind::Zero { .. } => z.clone(),
            Kind::AffineLinear(a) => {
                let lu = a.cache.get_or_build(step, || {
                    let n = a.matrix.nrows();
                    Ok((DMatrix::identity(n, n) + &a.matrix * step).lu())
                })?;
                let rhs = z - &a.offset * step;
                lu.solve(&rhs)
                    .ok_or_else(|| Error::Numerical("singular I + step*M".into()))?
            }
            Kind::SkewRotation2D { kappa, .. } => {
                let t = step * kappa;
                let scale = 1.0 / (1.0 + t * t);
                let mut x = z.clone();
                x[0] = scale * (z[0] - t * z[1]);
                x[1] = scale * (z[1] + t * z[0]);
                x
            }
            Kind::L1Offset { mask, offset, weight, .. } => {
                let t = step * weight;
                let mut x = z.clone();
                for (&i, &a) in mask.iter().zip(offset.iter()) {
                    x[i] = a + soft_threshold(z[i] - a, t);
                }
                x
            }
            Kind::UnitaryL1 { transform, offset, weight } => {
                let t = step * weight;
                let mut w = transform.apply(z)?;
                for (wi, &bi) in w.iter_mut().zip(offset.iter()) {
                    *wi = bi + soft_threshold(*wi - bi, t);
                }
                transform.apply_transpose(&w)?
            }
            Kind::IndicatorNonneg { .. } => z.map(|v| v.max(0.0)),
            Kind::IndicatorSimplex { .. } => project_simplex(z),
            Kind::IndicatorHalfspace { normal, bound } => project_halfspace(z, normal, *bound),
            Kind::QuadraticLs(ls) => {
                let chol = ls.cache.get_or_build(step, || {
                    let d = ls.rows.ncols();
                    let gram = ls.rows.tr_mul(&ls.rows) * step + DMatrix::identity(d, d);
                    gram.cholesky()
                        .ok_or_else(|| Error::Numerical("I + step*A^T A not positive definite".into()))
                })?;
                chol.solve(&(z + &ls.rhs * step))
            }
            Kind::PoissonNll { counts, weight } => {
                let t = step * weight;
                z.zip_map(counts, |zi, yi| poisson_prox(zi, yi, t))
            }
            Kind::NormalConeZero { dim } => Vector::zeros(*dim),
            Kind::PairTv { dim, first } => {
                let mut x = z.clone();
                let mut i = *first;
                while i + 1 < *dim {
                    let (a, b) = tv_pair_prox((z[i], z[i + 1]), step);
                    x[i] = a;
                    x[i + 1] = b;
                    i += 2;
                }
                x
            }
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("{} resolvent produced a non-finite value", self.kind_name())));
        }
        Ok(x)
    }

    /// Evaluates a single-valued operator at `x`.
    pub fn forward(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        match &self.kind {
            Kind::Zero { dim } => Ok(Vector::zeros(*dim)),
            Kind::AffineLinear(a) => Ok(&a.matrix * x + &a.offset),
            Kind::SkewRotation2D { kappa, dim } => {
                let mut y = Vector::zeros(*dim);
                y[0] = kappa * x[1];
                y[1] = -kappa * x[0];
                Ok(y)
            }
            Kind::QuadraticLs(ls) => {
                let residual = (&ls.rows * x).add_scalar(-ls.target);
                Ok(ls.rows.tr_mul(&residual))
            }
            Kind::PoissonNll { counts, weight } => {
                let mut y = Vector::zeros(x.len());
                for i in 0..x.len() {
                    let (xi, ci) = (x[i], counts[i]);
                    if ci > 0.0 && xi > 0.0 {
                        y[i] = weight * (1.0 - ci / xi);
                    } else if ci == 0.0 && xi > 0.0 {
                        y[i] = *weight;
                    } else {
                        return Err(invalid(format!(
                            "x[{i}] = {xi} lies outside the Poisson likelihood's open domain"
                        )));
                    }
                }
                Ok(y)
            }
            _ => Err(Error::SetValued(self.kind_name())),
        }
    }

    /// Least-squares target, when this is a [`MonotoneOp::quadratic_ls`].
    pub fn least_squares_parts(&self) -> Option<(&DMatrix<f64>, f64)> {
        match &self.kind {
            Kind::QuadraticLs(ls) => Some((&ls.rows, ls.target)),
            _ => None,
        }
    }
}
