//! Fixed-point iteration `z <- T z` with stopping, tracing and divergence
//! detection.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::operators::Vector;
use crate::splittings::{LiftedPoint, Splitting, StepOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    pub max_iters: usize,
    /// Stop once `||T z - z|| <= fp_tol`.
    pub fp_tol: f64,
    /// Declare divergence once `||z|| >= divergence_bound`.
    pub divergence_bound: f64,
    pub record_every: usize,
    /// Fill the `elapsed_ns` column. Off by default so traces are reproducible
    /// byte for byte.
    pub timing: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_iters: 10_000,
            fp_tol: 1e-9,
            divergence_bound: 1e12,
            record_every: 1,
            timing: false,
        }
    }
}

impl IterationConfig {
    pub fn new(max_iters: usize, fp_tol: f64) -> Self {
        IterationConfig { max_iters, fp_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.record_every == 0 {
            return Err(invalid("max_iters and record_every must be positive"));
        }
        if !(self.fp_tol > 0.0) || !(self.divergence_bound > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.fp_tol >= self.divergence_bound {
            return Err(invalid("fp_tol must be below divergence_bound"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max-iters",
            Status::Diverged => "diverged",
        })
    }
}

/// One recorded iteration. `None` fields are written as empty CSV cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub fp_residual: f64,
    pub z_norm: f64,
    pub objective: Option<f64>,
    pub rel_change: Option<f64>,
    pub dist_to_ref: Option<f64>,
    pub elapsed_ns: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str = "iter,fp_residual,z_norm,objective,rel_change,dist_to_ref,elapsed_ns";

impl IterationTrace {
    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// First recorded iteration whose `rel_change` is below `tol`.
    pub fn first_rel_change_below(&self, tol: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.rel_change.is_some_and(|c| c < tol)).map(|r| r.iter)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(TRACE_HEADER.split(','))?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    fn push(&mut self, row: TraceRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.iter < row.iter));
        self.rows.push(row);
    }
}

/// Optional per-iteration metrics evaluated on `S z`.
#[derive(Default, Clone, Copy)]
pub struct Metrics<'a> {
    pub objective: Option<&'a (dyn Fn(&Vector) -> f64 + Sync)>,
    pub reference: Option<&'a Vector>,
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub status: Status,
    /// Last iterate. For `Converged` this is the point whose residual met the
    /// tolerance.
    pub z_final: LiftedPoint,
    /// `S z_final`
    pub solution: Vector,
    /// Number of applications of `T`.
    pub iterations: usize,
    pub final_residual: f64,
    pub trace: IterationTrace,
}

/// Runs `z <- T z` from `z0`.
///
/// Residual, norm and metrics of iterate `k` are computed from the step
/// applied to `z^k`; iteration `k` is recorded when `k % record_every == 0`
/// and always when the loop stops.
pub fn iterate<F>(mut step: F, z0: LiftedPoint, cfg: &IterationConfig, metrics: Metrics<'_>) -> Result<IterationOutcome>
where
    F: FnMut(&LiftedPoint) -> Result<StepOutput>,
{
    cfg.validate()?;
    if let Some(r) = metrics.reference {
        crate::error::check_dim(z0.dim(), r.len())?;
    }
    let start = Instant::now();
    let mut trace = IterationTrace::default();
    let mut z = z0;
    let mut prev_objective: Option<f64> = None;
    let mut k = 0;
    loop {
        let out = step(&z).map_err(|e| Error::Iteration { iteration: k, source: Box::new(e) })?;
        let residual = out.image.distance(&z);
        let z_norm = z.norm();

        let stop = if residual <= cfg.fp_tol {
            Some(Status::Converged)
        } else if !out.image.is_finite() || out.image.norm() >= cfg.divergence_bound || !residual.is_finite() {
            Some(Status::Diverged)
        } else if k + 1 >= cfg.max_iters {
            Some(Status::MaxIters)
        } else {
            None
        };

        let objective = metrics.objective.map(|f| f(&out.solution));
        if stop.is_some() || k % cfg.record_every == 0 {
            let rel_change = match (objective, prev_objective) {
                (Some(f), Some(p)) => Some((f - p).abs() / p.abs()),
                _ => None,
            };
            trace.push(TraceRow {
                iter: k,
                fp_residual: residual,
                z_norm,
                objective,
                rel_change,
                dist_to_ref: metrics.reference.map(|r| (&out.solution - r).norm()),
                elapsed_ns: cfg.timing.then(|| start.elapsed().as_nanos() as u64),
            });
        }
        prev_objective = objective;

        match stop {
            Some(Status::Converged) => {
                return Ok(IterationOutcome {
                    status: Status::Converged,
                    z_final: z,
                    solution: out.solution,
                    iterations: k,
                    final_residual: residual,
                    trace,
                })
            }
            Some(status) => {
                return Ok(IterationOutcome {
                    status,
                    z_final: out.image,
                    solution: out.solution,
                    iterations: k + 1,
                    final_residual: residual,
                    trace,
                })
            }
            None => {
                z = out.image;
                k += 1;
            }
        }
    }
}

/// `||T z - z||`
pub fn fp_residual<F>(step: F, z: &LiftedPoint) -> Result<f64>
where
    F: FnOnce(&LiftedPoint) -> Result<StepOutput>,
{
    Ok(step(z)?.image.distance(z))
}

/// Iterates `splitting` from the origin.
pub fn run_splitting(splitting: &Splitting, cfg: &IterationConfig, metrics: Metrics<'_>) -> Result<IterationOutcome> {
    iterate(|z| splitting.step(z), splitting.initial_point(), cfg, metrics)
}

/// High-accuracy solution estimate: ten times the iteration budget at a
/// thousandth of the tolerance. Accepted when the final residual meets the
/// original tolerance.
pub fn compute_reference(splitting: &Splitting, cfg: &IterationConfig) -> Result<Vector> {
    let long = IterationConfig {
        max_iters: cfg.max_iters.saturating_mul(10),
        fp_tol: cfg.fp_tol / 1e3,
        record_every: cfg.max_iters.saturating_mul(10),
        timing: false,
        ..cfg.clone()
    };
    let out = run_splitting(splitting, &long, Metrics::default())?;
    if out.status == Status::Diverged || out.final_residual > cfg.fp_tol {
        return Err(Error::NonConvergedReference { residual: out.final_residual, iterations: out.iterations });
    }
    Ok(out.solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MonotoneOp;
    use crate::splittings::{FamilyParams, Method};
    use nalgebra::{dmatrix, dvector};
    use std::sync::Arc;

    fn drs_zero_cone(theta: f64) -> Splitting {
        let ops = vec![
            Arc::new(MonotoneOp::zero(1).unwrap()),
            Arc::new(MonotoneOp::normal_cone_zero(1).unwrap()),
        ];
        Splitting::new(Method::Family(FamilyParams::drs(1.0, theta)), ops).unwrap()
    }

    #[test]
    fn drs_contraction_is_exact_halving() {
        let s = drs_zero_cone(0.5);
        let cfg = IterationConfig::new(100, 1e-12);
        let out = iterate(|z| s.step(z), LiftedPoint::single(dvector![1.0]), &cfg, Metrics::default()).unwrap();
        assert_eq!(out.status, Status::Converged);
        for row in out.trace.rows() {
            assert_eq!(row.z_norm, 0.5f64.powi(row.iter as i32));
        }
        assert!(out.z_final.norm() < 1e-11);
    }

    #[test]
    fn prs_alternates() {
        let s = drs_zero_cone(2.0);
        let cfg = IterationConfig::new(11, 1e-12);
        let out = iterate(|z| s.step(z), LiftedPoint::single(dvector![1.0]), &cfg, Metrics::default()).unwrap();
        assert_eq!(out.status, Status::MaxIters);
        assert_eq!(out.iterations, 11);
        assert_eq!(out.z_final.block(0)[0], -1.0);
        assert!(out.trace.rows().iter().all(|r| r.z_norm == 1.0 && r.fp_residual == 2.0));
    }

    #[test]
    fn divergence_is_detected() {
        let s = drs_zero_cone(3.0);
        let cfg = IterationConfig::new(1000, 1e-12);
        let out = iterate(|z| s.step(z), LiftedPoint::single(dvector![1.0]), &cfg, Metrics::default()).unwrap();
        assert_eq!(out.status, Status::Diverged);
        // 2^40 > 1e12 > 2^39
        assert_eq!(out.iterations, 40);
    }

    #[test]
    fn fp_residual_examples() {
        let z = LiftedPoint::single(dvector![3.0, 4.0]);
        let id = |z: &LiftedPoint| Ok(StepOutput { image: z.clone(), solution: z.block(0).clone() });
        assert_eq!(fp_residual(id, &z).unwrap(), 0.0);
        let to_zero = |z: &LiftedPoint| Ok(StepOutput { image: LiftedPoint::zeros(1, 2), solution: z.block(0).clone() });
        assert_eq!(fp_residual(to_zero, &z).unwrap(), 5.0);
        let s = drs_zero_cone(0.5);
        assert_eq!(fp_residual(|z| s.step(z), &LiftedPoint::single(dvector![1.0])).unwrap(), 0.5);
    }

    #[test]
    fn operator_errors_carry_iteration() {
        let mut calls = 0;
        let step = |z: &LiftedPoint| {
            calls += 1;
            if calls == 4 {
                Err(Error::Numerical("boom".into()))
            } else {
                Ok(StepOutput { image: LiftedPoint::single(z.block(0) * 0.0 + dvector![calls as f64]), solution: dvector![0.0] })
            }
        };
        let err = iterate(step, LiftedPoint::single(dvector![0.0]), &IterationConfig::new(10, 1e-12), Metrics::default())
            .unwrap_err();
        assert!(matches!(err, Error::Iteration { iteration: 3, .. }), "{err}");
    }

    #[test]
    fn trace_metrics_and_csv() {
        let s = drs_zero_cone(0.5);
        let f = |x: &Vector| 1.0 + x[0];
        let reference = dvector![0.0];
        let metrics = Metrics { objective: Some(&f), reference: Some(&reference) };
        let cfg = IterationConfig { record_every: 3, ..IterationConfig::new(7, 1e-12) };
        let out = iterate(|z| s.step(z), LiftedPoint::single(dvector![1.0]), &cfg, metrics).unwrap();
        let iters: Vec<usize> = out.trace.rows().iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![0, 3, 6]);
        let csv = out.trace.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        // first row has no previous objective and timing is off
        assert!(lines.next().unwrap().ends_with(",,0.0,"));
        assert!(out.trace.rows()[1].rel_change.is_some());
        assert_eq!(IterationTrace::default().to_csv_string().trim(), TRACE_HEADER);
    }

    #[test]
    fn reference_for_three_affine_toy() {
        let a = Arc::new(MonotoneOp::affine(dmatrix![1.0], dvector![-1.0]).unwrap());
        let b = Arc::new(MonotoneOp::affine(dmatrix![1.0], dvector![0.0]).unwrap());
        let m = Method::Ryu3(crate::splittings::Ryu3Params { alpha: 1.0, theta: 0.5 });
        let s = Splitting::new(m, vec![a, b.clone(), b]).unwrap();
        let x = compute_reference(&s, &IterationConfig::new(1000, 1e-9)).unwrap();
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn reference_failure_is_reported() {
        // 0 in 1 + 0 has no solution, so DRS drifts off with constant residual
        let ops = vec![
            Arc::new(MonotoneOp::affine(dmatrix![0.0], dvector![1.0]).unwrap()),
            Arc::new(MonotoneOp::zero(1).unwrap()),
        ];
        let s = Splitting::new(Method::Family(FamilyParams::drs(1.0, 1.0)), ops).unwrap();
        let err = compute_reference(&s, &IterationConfig::new(5, 1e-9)).unwrap_err();
        assert!(matches!(err, Error::NonConvergedReference { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(IterationConfig::new(0, 1e-9).validate().is_err());
        let cfg = IterationConfig { divergence_bound: 1e-10, ..IterationConfig::new(10, 1e-9) };
        assert!(cfg.validate().is_err());
    }
}
