//! Divergence witnesses for the two-operator family.
//!
//! With `A = (tan w / alpha) K` and `B = -(tan w / beta) K`, `K` the planar
//! rotation by a right angle, `zer(A + B) = {0}` but the family map with
//! `alpha != beta` is a scaled rotation of modulus above one, so every nonzero
//! start diverges.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::operators::{MonotoneOp, Vector};
use crate::splittings::{step_family, FamilyParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationPair {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub dim: usize,
}

impl RotationPair {
    pub fn new(alpha: f64, beta: f64, omega: f64, dim: usize) -> Result<Self> {
        let p = RotationPair { alpha, beta, omega, dim };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(invalid("alpha and beta must be positive"));
        }
        if !(self.omega > 0.0 && self.omega < FRAC_PI_2) {
            return Err(invalid(format!("omega = {} must lie strictly inside (0, pi/2)", self.omega)));
        }
        if self.dim < 2 {
            return Err(invalid("rotation pair needs dimension at least 2"));
        }
        Ok(())
    }

    /// Family parameters with `eta = 0`.
    pub fn family(&self, theta: f64) -> FamilyParams {
        FamilyParams { alpha: self.alpha, beta: self.beta, theta, eta: 0.0 }
    }
}

/// `(A, B)` acting on the first two coordinates of `R^dim`.
pub fn build_rotation_pair(p: &RotationPair) -> Result<(MonotoneOp, MonotoneOp)> {
    p.validate()?;
    let t = p.omega.tan();
    Ok((MonotoneOp::skew_rotation(t / p.alpha, p.dim)?, MonotoneOp::skew_rotation(-t / p.beta, p.dim)?))
}

/// Per-step growth factor `sqrt(1 + ((theta/2)(1 - beta/alpha) cos w sin w)^2)`
/// as published for this construction.
///
/// The family map itself works out to `I + theta (1 - beta/alpha) cos w sin w K`,
/// whose modulus [`spectral_growth`] computes; the two differ by the factor
/// `1/2` inside the square.
pub fn predicted_growth(p: &RotationPair, theta: f64) -> f64 {
    let dev = 0.5 * theta * (1.0 - p.beta / p.alpha) * p.omega.cos() * p.omega.sin();
    (1.0 + dev * dev).sqrt()
}

/// `sqrt(1 + (theta (1 - beta/alpha) cos w sin w)^2)`, the modulus derived from
/// the resolvents `J_{aA} = c^2 I - cs K` and `J_{bB} = c^2 I + cs K`.
pub fn closed_form_growth(p: &RotationPair, theta: f64) -> f64 {
    let dev = theta * (1.0 - p.beta / p.alpha) * p.omega.cos() * p.omega.sin();
    (1.0 + dev * dev).sqrt()
}

/// Iteration matrix of the family map on the rotation plane, assembled by
/// applying [`step_family`] to the unit vectors.
pub fn family_matrix(p: &RotationPair, theta: f64) -> Result<DMatrix<f64>> {
    let (a, b) = build_rotation_pair(p)?;
    let params = p.family(theta);
    let mut m = DMatrix::zeros(2, 2);
    for j in 0..2 {
        let mut e = Vector::zeros(p.dim);
        e[j] = 1.0;
        let image = step_family(&params, &a, &b, &e)?.image;
        m[(0, j)] = image[0];
        m[(1, j)] = image[1];
    }
    Ok(m)
}

/// Largest eigenvalue modulus of [`family_matrix`].
pub fn spectral_growth(p: &RotationPair, theta: f64) -> Result<f64> {
    let m = family_matrix(p, theta)?;
    Ok(m.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// Geometric mean of `||z^{i+1}|| / ||z^i||` over `k` family steps from `z0`.
/// Returns 0 if an iterate reaches the origin exactly.
pub fn measure_growth(a: &MonotoneOp, b: &MonotoneOp, params: &FamilyParams, z0: &Vector, k: usize) -> Result<f64> {
    if z0.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroStart);
    }
    if k == 0 {
        return Err(invalid("need at least one iteration"));
    }
    let mut z = z0.clone();
    let mut log_sum = 0.0;
    for _ in 0..k {
        let next = step_family(params, a, b, &z)?.image;
        let (before, after) = (z.norm(), next.norm());
        if after == 0.0 {
            return Ok(0.0);
        }
        log_sum += (after / before).ln();
        if !log_sum.is_finite() {
            return Err(Error::Numerical("growth overflowed".into()));
        }
        z = next;
    }
    Ok((log_sum / k as f64).exp())
}

/// One row of the growth table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub theta: f64,
    pub predicted: f64,
    pub spectral: f64,
    pub measured: f64,
    /// `|measured - predicted|`
    pub error: f64,
}

/// Measures the rotation pair from `z0 = (1, 1/2, 0, ...)` over `iters` steps.
pub fn rotation_growth_row(p: &RotationPair, theta: f64, iters: usize) -> Result<GrowthRow> {
    let (a, b) = build_rotation_pair(p)?;
    let mut z0 = Vector::zeros(p.dim);
    z0[0] = 1.0;
    z0[1] = 0.5;
    let measured = measure_growth(&a, &b, &p.family(theta), &z0, iters)?;
    let predicted = predicted_growth(p, theta);
    Ok(GrowthRow {
        alpha: p.alpha,
        beta: p.beta,
        omega: p.omega,
        theta,
        predicted,
        spectral: spectral_growth(p, theta)?,
        measured,
        error: (measured - predicted).abs(),
    })
}

/// Iterates of DRS on `(0, N_{0})` in one dimension; `z^k = (1 - theta)^k z^0`.
pub fn theta_range_iterates(theta: f64, z0: f64, k: usize) -> Result<Vec<f64>> {
    let (a, b) = (MonotoneOp::zero(1)?, MonotoneOp::normal_cone_zero(1)?);
    let params = FamilyParams::drs(1.0, theta);
    let mut z = Vector::from_element(1, z0);
    let mut out = Vec::with_capacity(k + 1);
    out.push(z0);
    for _ in 0..k {
        z = step_family(&params, &a, &b, &z)?.image;
        out.push(z[0]);
    }
    Ok(out)
}

/// Measured growth of DRS on `(0, N_{0})`, which is `|1 - theta|`.
pub fn theta_range_growth(theta: f64, iters: usize) -> Result<f64> {
    let (a, b) = (MonotoneOp::zero(1)?, MonotoneOp::normal_cone_zero(1)?);
    measure_growth(&a, &b, &FamilyParams::drs(1.0, theta), &Vector::from_element(1, 1.0), iters)
}
