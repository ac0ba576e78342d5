//! Fixed-point / solution mapping pairs `(T, S)`.
//!
//! Each method evaluates every operator resolvent once per step and returns
//! both the image `T z` and the candidate solution `S z` from that single
//! evaluation. `T` acts on a [`LiftedPoint`] made of `lifting` blocks of the
//! ambient dimension.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::operators::{MonotoneOp, Vector};

/// `lifting` blocks, each a vector of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    blocks: Vec<Vector>,
}

impl LiftedPoint {
    pub fn new(blocks: Vec<Vector>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| invalid("lifted point needs at least one block"))?;
        let dim = first.len();
        for b in &blocks {
            check_dim(dim, b.len())?;
        }
        Ok(LiftedPoint { blocks })
    }

    pub fn zeros(lifting: usize, dim: usize) -> Self {
        LiftedPoint { blocks: vec![Vector::zeros(dim); lifting.max(1)] }
    }

    pub fn single(v: Vector) -> Self {
        LiftedPoint { blocks: vec![v] }
    }

    pub fn lifting(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn blocks(&self) -> &[Vector] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Vector {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<Vector> {
        self.blocks
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// Euclidean distance on the product space. Panics on shape mismatch.
    pub fn distance(&self, other: &LiftedPoint) -> f64 {
        assert_eq!(self.lifting(), other.lifting(), "lifting mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Result of one application of a splitting.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// `T z`
    pub image: LiftedPoint,
    /// `S z`
    pub solution: Vector,
}

/// Two-operator family: `x1 = J_{aA} z`, `x2 = J_{bB}((1 + b/a) x1 - (b/a) z)`,
/// `T z = z + theta (x2 - x1)`, `S z = eta x1 + (1 - eta) x2`.
///
/// `alpha == beta` with `theta` in (0, 2) is Douglas-Rachford; `theta = 2` is
/// Peaceman-Rachford.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub eta: f64,
}

impl FamilyParams {
    pub fn drs(alpha: f64, theta: f64) -> Self {
        FamilyParams { alpha, beta: alpha, theta, eta: 0.0 }
    }

    pub fn prs(alpha: f64) -> Self {
        Self::drs(alpha, 2.0)
    }

    fn validate(&self) -> Result<()> {
        step_ok("alpha", self.alpha)?;
        step_ok("beta", self.beta)?;
        if self.theta == 0.0 || !self.theta.is_finite() {
            return Err(invalid("theta must be nonzero and finite"));
        }
        if !self.eta.is_finite() {
            return Err(invalid("eta must be finite"));
        }
        Ok(())
    }
}

/// Minimal-lifting three-operator splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ryu3Params {
    pub alpha: f64,
    pub theta: f64,
}

/// Parallel proximal algorithm on the three-copy consensus reformulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpxaParams {
    pub gamma: f64,
    pub weights: [f64; 3],
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DysParams {
    pub alpha: f64,
}

/// Product-space primal-dual hybrid gradient: one primal block and one dual
/// block for each of `B` and `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pdhg3Params {
    pub tau: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Ppm { alpha: f64 },
    Family(FamilyParams),
    Ppxa(PpxaParams),
    Ryu3(Ryu3Params),
    Dys(DysParams),
    Pdhg3(Pdhg3Params),
}

impl Method {
    /// Number of `d`-dimensional blocks `T` acts on.
    pub fn lifting(&self) -> usize {
        match self {
            Method::Ppm { .. } | Method::Family(_) | Method::Dys(_) => 1,
            Method::Ryu3(_) => 2,
            Method::Ppxa(_) | Method::Pdhg3(_) => 3,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Method::Ppm { .. } => 1,
            Method::Family(_) => 2,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ppm { .. } => "ppm",
            Method::Family(_) => "family",
            Method::Ppxa(_) => "ppxa",
            Method::Ryu3(_) => "ryu3",
            Method::Dys(_) => "dys",
            Method::Pdhg3(_) => "pdhg3",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Method::Ppm { alpha } => step_ok("alpha", *alpha),
            Method::Family(p) => p.validate(),
            Method::Ryu3(p) => {
                step_ok("alpha", p.alpha)?;
                step_ok("theta", p.theta)
            }
            Method::Ppxa(p) => {
                step_ok("gamma", p.gamma)?;
                step_ok("theta", p.theta)?;
                for w in p.weights {
                    step_ok("weight", w)?;
                }
                let total: f64 = p.weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("PPXA weights sum to {total}, not 1")));
                }
                Ok(())
            }
            Method::Dys(p) => step_ok("alpha", p.alpha),
            Method::Pdhg3(p) => {
                step_ok("tau", p.tau)?;
                step_ok("sigma", p.sigma)?;
                if 2.0 * p.tau * p.sigma > 1.0 {
                    return Err(invalid(format!(
                        "PDHG steps need 2 tau sigma <= 1, got {}",
                        2.0 * p.tau * p.sigma
                    )));
                }
                Ok(())
            }
        }
    }

    /// Parameter choices outside the region where convergence is guaranteed
    /// for every monotone input.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Method::Family(p) => {
                if p.alpha != p.beta {
                    out.push(format!(
                        "alpha = {} differs from beta = {}: iteration may diverge",
                        p.alpha, p.beta
                    ));
                }
                if !(p.theta > 0.0 && p.theta < 2.0) {
                    out.push(format!("theta = {} outside (0, 2): iteration may not converge", p.theta));
                }
            }
            Method::Ryu3(p) if !(p.theta > 0.0 && p.theta < 1.0) => {
                out.push(format!("theta = {} outside (0, 1): convergence not guaranteed", p.theta));
            }
            Method::Ppxa(p) if p.theta >= 2.0 => {
                out.push(format!("theta = {} outside (0, 2): convergence not guaranteed", p.theta));
            }
            _ => {}
        }
        out
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn step_ok(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// A method bound to its operands.
#[derive(Debug, Clone)]
pub struct Splitting {
    method: Method,
    ops: Vec<Arc<MonotoneOp>>,
    dim: usize,
}

impl Splitting {
    pub fn new(method: Method, ops: Vec<Arc<MonotoneOp>>) -> Result<Self> {
        method.validate()?;
        if ops.len() != method.arity() {
            return Err(invalid(format!(
                "{} takes {} operators, got {}",
                method.name(),
                method.arity(),
                ops.len()
            )));
        }
        let dim = ops[0].dim();
        for op in &ops {
            check_dim(dim, op.dim())?;
        }
        if let Method::Dys(_) = method {
            if !ops[2].is_single_valued() {
                return Err(Error::SetValued(ops[2].kind_name()));
            }
        }
        Ok(Splitting { method, ops, dim })
    }

    pub fn method(&self) -> &Method {
        &self.method
    }

    pub fn operators(&self) -> &[Arc<MonotoneOp>] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lifting(&self) -> usize {
        self.method.lifting()
    }

    /// Origin in every lifted block.
    pub fn initial_point(&self) -> LiftedPoint {
        LiftedPoint::zeros(self.lifting(), self.dim)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.method.warnings()
    }

    pub fn step(&self, z: &LiftedPoint) -> Result<StepOutput> {
        check_dim(self.lifting(), z.lifting())?;
        check_dim(self.dim, z.dim())?;
        let ops = &self.ops;
        match &self.method {
            Method::Ppm { alpha } => {
                let x = ops[0].resolvent(*alpha, z.block(0))?;
                Ok(StepOutput { image: LiftedPoint::single(x.clone()), solution: x })
            }
            Method::Family(p) => {
                let s = step_family(p, &ops[0], &ops[1], z.block(0))?;
                Ok(StepOutput { image: LiftedPoint::single(s.image), solution: s.solution })
            }
            Method::Ryu3(p) => {
                let s = step_ryu3(p, &ops[0], &ops[1], &ops[2], z)?;
                Ok(StepOutput { image: s.image, solution: s.solution })
            }
            Method::Ppxa(p) => step_ppxa(p, &ops[0], &ops[1], &ops[2], z),
            Method::Dys(p) => {
                let (t, s) = step_dys(p, &ops[0], &ops[1], &ops[2], z.block(0))?;
                Ok(StepOutput { image: LiftedPoint::single(t), solution: s })
            }
            Method::Pdhg3(p) => step_pdhg3(p, &ops[0], &ops[1], &ops[2], z),
        }
    }
}

/// Intermediate values of one family step.
#[derive(Debug, Clone)]
pub struct FamilyStep {
    pub image: Vector,
    pub solution: Vector,
    pub x1: Vector,
    pub x2: Vector,
}

pub fn step_family(p: &FamilyParams, a: &MonotoneOp, b: &MonotoneOp, z: &Vector) -> Result<FamilyStep> {
    let ratio = p.beta / p.alpha;
    let x1 = a.resolvent(p.alpha, z)?;
    let x2 = b.resolvent(p.beta, &(&x1 * (1.0 + ratio) - z * ratio))?;
    let image = z + (&x2 - &x1) * p.theta;
    let solution = &x1 * p.eta + &x2 * (1.0 - p.eta);
    Ok(FamilyStep { image, solution, x1, x2 })
}

#[derive(Debug, Clone)]
pub struct Ryu3Step {
    pub image: LiftedPoint,
    pub solution: Vector,
    pub x1: Vector,
    pub x2: Vector,
    pub x3: Vector,
}

pub fn step_ryu3(
    p: &Ryu3Params,
    a: &MonotoneOp,
    b: &MonotoneOp,
    c: &MonotoneOp,
    z: &LiftedPoint,
) -> Result<Ryu3Step> {
    check_dim(2, z.lifting())?;
    let (z1, z2) = (z.block(0), z.block(1));
    let x1 = a.resolvent(p.alpha, z1)?;
    let x2 = b.resolvent(p.alpha, &(&x1 + z2))?;
    let x3 = c.resolvent(p.alpha, &(&x1 - z1 + &x2 - z2))?;
    let t1 = z1 + (&x3 - &x1) * p.theta;
    let t2 = z2 + (&x3 - &x2) * p.theta;
    let solution = (&x1 + &x2 + &x3) / 3.0;
    Ok(Ryu3Step { image: LiftedPoint { blocks: vec![t1, t2] }, solution, x1, x2, x3 })
}

pub fn step_ppxa(
    p: &PpxaParams,
    a: &MonotoneOp,
    b: &MonotoneOp,
    c: &MonotoneOp,
    z: &LiftedPoint,
) -> Result<StepOutput> {
    check_dim(3, z.lifting())?;
    let ops = [a, b, c];
    let mut xs = Vec::with_capacity(3);
    for (i, op) in ops.iter().enumerate() {
        xs.push(op.resolvent(p.gamma / p.weights[i], z.block(i))?);
    }
    let mut z_bar = Vector::zeros(z.dim());
    let mut x_bar = Vector::zeros(z.dim());
    for i in 0..3 {
        z_bar += z.block(i) * p.weights[i];
        x_bar += &xs[i] * p.weights[i];
    }
    let pivot = &x_bar * 2.0 - &z_bar;
    let blocks = (0..3).map(|i| z.block(i) + (&pivot - &xs[i]) * p.theta).collect();
    let solution = xs.swap_remove(0);
    Ok(StepOutput { image: LiftedPoint { blocks }, solution })
}

/// Davis-Yin step with `c` evaluated forward. Returns `(T z, S z)`.
pub fn step_dys(
    p: &DysParams,
    a: &MonotoneOp,
    b: &MonotoneOp,
    c: &MonotoneOp,
    z: &Vector,
) -> Result<(Vector, Vector)> {
    if !c.is_single_valued() {
        return Err(Error::SetValued(c.kind_name()));
    }
    let xb = b.resolvent(p.alpha, z)?;
    let grad = c.forward(&xb)?;
    let xa = a.resolvent(p.alpha, &(&xb * 2.0 - z - grad * p.alpha))?;
    let image = z - &xb + xa;
    Ok((image, xb))
}

/// Blocks are `(x, u, v)`: primal, dual for `b`, dual for `c`.
pub fn step_pdhg3(
    p: &Pdhg3Params,
    a: &MonotoneOp,
    b: &MonotoneOp,
    c: &MonotoneOp,
    z: &LiftedPoint,
) -> Result<StepOutput> {
    check_dim(3, z.lifting())?;
    let (x, u, v) = (z.block(0), z.block(1), z.block(2));
    let x_next = a.resolvent(p.tau, &(x - (u + v) * p.tau))?;
    let extrapolated = &x_next * 2.0 - x;
    // Moreau: prox of sigma B^* from the resolvent of B / sigma
    let dual = |op: &MonotoneOp, w: &Vector| -> Result<Vector> {
        let arg = w / p.sigma + &extrapolated;
        let j = op.resolvent(1.0 / p.sigma, &arg)?;
        Ok((arg - j) * p.sigma)
    };
    let u_next = dual(b, u)?;
    let v_next = dual(c, v)?;
    Ok(StepOutput {
        image: LiftedPoint { blocks: vec![x_next.clone(), u_next, v_next] },
        solution: x_next,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector, DMatrix};

    fn op(m: MonotoneOp) -> Arc<MonotoneOp> {
        Arc::new(m)
    }

    fn identity1(c: f64) -> MonotoneOp {
        MonotoneOp::affine(dmatrix![1.0], dvector![c]).unwrap()
    }

    #[test]
    fn family_examples() {
        let zero = MonotoneOp::zero(1).unwrap();
        let cone = MonotoneOp::normal_cone_zero(1).unwrap();
        let s = step_family(&FamilyParams::drs(1.0, 0.5), &zero, &cone, &dvector![4.0]).unwrap();
        assert_eq!(s.image, dvector![2.0]);
        let s = step_family(&FamilyParams::prs(1.0), &zero, &cone, &dvector![4.0]).unwrap();
        assert_eq!(s.image, dvector![-4.0]);

        // J of x -> x with unit step halves its input:
        // x1 = 2/2 = 1, x2 = (2*1 - 2)/2 = 0, T = 2 + (0 - 1) = 1
        let (a, b) = (identity1(0.0), identity1(0.0));
        let s = step_family(&FamilyParams::drs(1.0, 1.0), &a, &b, &dvector![2.0]).unwrap();
        assert_eq!(s.x1, dvector![1.0]);
        assert_eq!(s.x2, dvector![0.0]);
        assert_eq!(s.image, dvector![1.0]);
        assert_eq!(s.solution, dvector![0.0]);
    }

    #[test]
    fn family_solution_weights() {
        let (a, b) = (identity1(0.0), identity1(1.0));
        let mut p = FamilyParams::drs(1.0, 1.0);
        p.eta = 0.25;
        let s = step_family(&p, &a, &b, &dvector![3.0]).unwrap();
        assert!((&s.solution - (&s.x1 * 0.25 + &s.x2 * 0.75)).norm() < 1e-15);
    }

    #[test]
    fn ryu3_examples() {
        let zero = MonotoneOp::zero(1).unwrap();
        let p = Ryu3Params { alpha: 1.0, theta: 0.5 };
        let z = LiftedPoint::new(vec![dvector![3.0], dvector![2.0]]).unwrap();
        let s = step_ryu3(&p, &zero, &zero, &zero, &z).unwrap();
        assert_eq!(s.image.blocks(), &[dvector![3.0], dvector![1.0]]);
        assert!((s.solution[0] - (3.0 + 2.0 / 3.0)).abs() < 1e-15);

        // 3x - 1 = 0: x* = 1/3, a = x* - 1 = -2/3, b = 1/3, z* = (a + x*, b)
        let (a, b, c) = (identity1(-1.0), identity1(0.0), identity1(0.0));
        let z = LiftedPoint::new(vec![dvector![-1.0 / 3.0], dvector![1.0 / 3.0]]).unwrap();
        for theta in [0.3, 0.5, 1.0] {
            let s = step_ryu3(&Ryu3Params { alpha: 1.0, theta }, &a, &b, &c, &z).unwrap();
            assert!(s.image.distance(&z) < 1e-15);
            assert!((s.solution[0] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ppxa_examples() {
        let zero = MonotoneOp::zero(1).unwrap();
        let p = PpxaParams { gamma: 1.0, weights: [1.0 / 3.0; 3], theta: 1.0 };
        let z = LiftedPoint::new(vec![dvector![3.0], dvector![0.0], dvector![0.0]]).unwrap();
        let out = step_ppxa(&p, &zero, &zero, &zero, &z).unwrap();
        // identity resolvents: every block moves to the weighted mean z_bar = 1
        for b in out.image.blocks() {
            assert!((b[0] - 1.0).abs() < 1e-15);
        }

        let id = identity1(0.0);
        let z = LiftedPoint::zeros(3, 1);
        let out = step_ppxa(&p, &id, &id, &id, &z).unwrap();
        assert_eq!(out.image, z);
        assert_eq!(out.solution, dvector![0.0]);
    }

    #[test]
    fn ppxa_symmetric_start_stays_symmetric() {
        let m = MonotoneOp::affine(dmatrix![2.0, 1.0; -1.0, 1.0], dvector![0.5, -1.0]).unwrap();
        let p = PpxaParams { gamma: 0.7, weights: [1.0 / 3.0; 3], theta: 1.3 };
        let blk = dvector![1.0, -2.0];
        let z = LiftedPoint::new(vec![blk.clone(), blk.clone(), blk]).unwrap();
        let out = step_ppxa(&p, &m, &m, &m, &z).unwrap();
        let b = out.image.blocks();
        assert_eq!(b[0], b[1]);
        assert_eq!(b[1], b[2]);
    }

    #[test]
    fn dys_examples() {
        let zero = MonotoneOp::zero(1).unwrap();
        let id = identity1(0.0);
        let p = DysParams { alpha: 1.0 };
        let (t, _) = step_dys(&p, &zero, &zero, &id, &dvector![2.0]).unwrap();
        assert_eq!(t, dvector![0.0]);
        let (t, s) = step_dys(&p, &zero, &zero, &zero, &dvector![7.0]).unwrap();
        assert_eq!(t, dvector![7.0]);
        assert_eq!(s, dvector![7.0]);

        // with C = 0 the step is z - J_B z + J_A(2 J_B z - z)
        let a = MonotoneOp::affine(dmatrix![1.0, 0.5; -0.5, 2.0], dvector![1.0, 0.0]).unwrap();
        let b = MonotoneOp::indicator_nonneg(2).unwrap();
        let z = dvector![0.3, -1.1];
        let (t, _) = step_dys(&p, &a, &b, &MonotoneOp::zero(2).unwrap(), &z).unwrap();
        let jb = b.resolvent(1.0, &z).unwrap();
        let expected = &z - &jb + a.resolvent(1.0, &(&jb * 2.0 - &z)).unwrap();
        assert!((t - expected).norm() < 1e-15);

        let cone = MonotoneOp::normal_cone_zero(1).unwrap();
        assert!(matches!(step_dys(&p, &zero, &zero, &cone, &dvector![1.0]), Err(Error::SetValued(_))));
    }

    #[test]
    fn pdhg3_zero_operators_fix_after_one_step() {
        let zero = MonotoneOp::zero(2).unwrap();
        let p = Pdhg3Params { tau: 0.5, sigma: 1.0 };
        let z = LiftedPoint::new(vec![dvector![1.0, 2.0], dvector![0.5, -1.0], dvector![3.0, 0.0]]).unwrap();
        let once = step_pdhg3(&p, &zero, &zero, &zero, &z).unwrap().image;
        assert_eq!(once.block(1), &Vector::zeros(2));
        assert_eq!(once.block(2), &Vector::zeros(2));
        let twice = step_pdhg3(&p, &zero, &zero, &zero, &once).unwrap().image;
        assert_eq!(twice, once);
    }

    /// Two-operator PDHG written directly: x+ = J_{tau A}(x - tau u),
    /// u+ = prox_{sigma B*}(u + sigma (2x+ - x)) via Moreau. At tau = sigma = 1
    /// this is x+ = J_A(x - u), u+ = (I - J_B)(u + 2x+ - x).
    fn pdhg2_reference(tau: f64, sigma: f64, a: &MonotoneOp, b: &MonotoneOp, x: &Vector, u: &Vector) -> (Vector, Vector) {
        let x_next = a.resolvent(tau, &(x - u * tau)).unwrap();
        let w = u + (&x_next * 2.0 - x) * sigma;
        let u_next = &w - b.resolvent(1.0 / sigma, &(&w / sigma)).unwrap() * sigma;
        (x_next, u_next)
    }

    #[test]
    fn pdhg3_reduces_to_two_operator_pdhg() {
        let a = MonotoneOp::affine(dmatrix![1.0, 0.3; -0.3, 0.5], dvector![1.0, -2.0]).unwrap();
        let b = MonotoneOp::l1_offset(2, vec![0, 1], dvector![0.5, 0.0], 0.8).unwrap();
        let c = MonotoneOp::zero(2).unwrap();
        let p = Pdhg3Params { tau: 0.5, sigma: 1.0 };
        let mut z = LiftedPoint::new(vec![dvector![0.2, 0.1], dvector![-0.4, 0.9], Vector::zeros(2)]).unwrap();
        let (mut x, mut u) = (z.block(0).clone(), z.block(1).clone());
        for _ in 0..50 {
            z = step_pdhg3(&p, &a, &b, &c, &z).unwrap().image;
            (x, u) = pdhg2_reference(p.tau, p.sigma, &a, &b, &x, &u);
            assert!((z.block(0) - &x).norm() < 1e-14);
            assert!((z.block(1) - &u).norm() < 1e-14);
            assert_eq!(z.block(2), &Vector::zeros(2));
        }
    }

    /// Columns of the iteration matrix of a linear step, found by applying it
    /// to unit vectors.
    fn assemble(step: impl Fn(&LiftedPoint) -> LiftedPoint, lifting: usize, dim: usize) -> DMatrix<f64> {
        let n = lifting * dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut blocks = vec![Vector::zeros(dim); lifting];
            blocks[j / dim][j % dim] = 1.0;
            let out = step(&LiftedPoint::new(blocks).unwrap());
            for (bi, b) in out.blocks().iter().enumerate() {
                for k in 0..dim {
                    m[(bi * dim + k, j)] = b[k];
                }
            }
        }
        m
    }

    #[test]
    fn pdhg3_on_scaled_identities_converges() {
        let id = identity1(0.0);
        let p = Pdhg3Params { tau: 0.5, sigma: 1.0 };
        let m = assemble(|z| step_pdhg3(&p, &id, &id, &id, z).unwrap().image, 3, 1);
        let radius = m.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
        assert!(radius < 1.0, "spectral radius {radius}");

        let mut z = LiftedPoint::new(vec![dvector![1.0], dvector![-2.0], dvector![0.5]]).unwrap();
        for _ in 0..2000 {
            z = step_pdhg3(&p, &id, &id, &id, &z).unwrap().image;
        }
        assert!(z.norm() < 1e-10);
    }

    #[test]
    fn splitting_validation() {
        let a = op(MonotoneOp::zero(2).unwrap());
        let b = op(MonotoneOp::zero(3).unwrap());
        let fam = Method::Family(FamilyParams::drs(1.0, 1.0));
        assert!(matches!(Splitting::new(fam, vec![a.clone(), b]), Err(Error::Dimension { .. })));
        assert!(Splitting::new(fam, vec![a.clone()]).is_err());
        let bad = Method::Ppxa(PpxaParams { gamma: 1.0, weights: [0.5, 0.3, 0.3], theta: 1.0 });
        assert!(Splitting::new(bad, vec![a.clone(), a.clone(), a.clone()]).is_err());
        let bad = Method::Pdhg3(Pdhg3Params { tau: 1.0, sigma: 1.0 });
        assert!(Splitting::new(bad, vec![a.clone(), a.clone(), a.clone()]).is_err());
        let cone = op(MonotoneOp::normal_cone_zero(2).unwrap());
        let dys = Method::Dys(DysParams { alpha: 1.0 });
        assert!(matches!(Splitting::new(dys, vec![a.clone(), a.clone(), cone]), Err(Error::SetValued(_))));
        let bad_family = Method::Family(FamilyParams { alpha: 1.0, beta: 1.0, theta: 0.0, eta: 0.0 });
        assert!(Splitting::new(bad_family, vec![a.clone(), a.clone()]).is_err());
    }

    #[test]
    fn liftings_and_warnings() {
        let z = op(MonotoneOp::zero(1).unwrap());
        let cases = [
            (Method::Ppm { alpha: 1.0 }, 1),
            (Method::Family(FamilyParams::drs(1.0, 1.0)), 1),
            (Method::Dys(DysParams { alpha: 1.0 }), 1),
            (Method::Ryu3(Ryu3Params { alpha: 1.0, theta: 0.5 }), 2),
            (Method::Ppxa(PpxaParams { gamma: 1.0, weights: [1.0 / 3.0; 3], theta: 1.0 }), 3),
            (Method::Pdhg3(Pdhg3Params { tau: 0.5, sigma: 1.0 }), 3),
        ];
        for (m, lifting) in cases {
            let s = Splitting::new(m, vec![z.clone(); m.arity()]).unwrap();
            assert_eq!(s.lifting(), lifting, "{m}");
            assert_eq!(s.initial_point().lifting(), lifting);
            assert!(s.warnings().is_empty(), "{m}");
        }
        let ryu = Method::Ryu3(Ryu3Params { alpha: 1.0, theta: 1.5 });
        let s = Splitting::new(ryu, vec![z.clone(); 3]).unwrap();
        assert_eq!(s.warnings().len(), 1);
        assert!(!Method::Ryu3(Ryu3Params { alpha: 1.0, theta: 1.0 }).warnings().is_empty());
        assert_eq!(Method::Family(FamilyParams { alpha: 1.0, beta: 2.0, theta: 2.5, eta: 0.0 }).warnings().len(), 2);
    }
}
