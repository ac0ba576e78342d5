#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use resplit::{LiftedPoint, MonotoneOp, Vector};

pub fn gaussian_vector<R: Rng>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.sample(StandardNormal))
}

/// `x -> (P P^T / d + (Q - Q^T) / 2) x + c`: positive semidefinite plus skew.
pub fn random_affine<R: Rng>(rng: &mut R, d: usize) -> MonotoneOp {
    let p = gaussian_matrix(rng, d);
    let q = gaussian_matrix(rng, d);
    let m = &p * p.transpose() / d as f64 + (&q - q.transpose()) * 0.5;
    MonotoneOp::affine(m, gaussian_vector(rng, d)).expect("monotone by construction")
}

pub fn random_point<R: Rng>(rng: &mut R, lifting: usize, d: usize) -> LiftedPoint {
    LiftedPoint::new((0..lifting).map(|_| gaussian_vector(rng, d)).collect()).unwrap()
}
