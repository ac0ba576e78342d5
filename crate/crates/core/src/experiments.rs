//! Seeded benchmark problems with three-operator structure.
//!
//! * `DenoiseL1`: `min ||x_S - a||_1 + lambda ||U x - b||_1` over `x >= 0`,
//!   `U` the orthonormal Haar transform.
//! * `Portfolio`: `min (1/2) sum_i (a_i^T x - b)^2` over the simplex with
//!   `mu^T x >= b`.
//! * `PoissonTv`: `min lambda sum_i l(x_i; y_i) + sum_i |x_{i+1} - x_i|`, the
//!   total variation split into its odd and even neighbour pairs.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, Normal, Poisson};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use serde::{Deserialize, Serialize};

use crate::engine::{iterate, IterationConfig, IterationOutcome, Metrics};
use crate::error::{invalid, Error, Result};
use crate::operators::{MonotoneOp, Orthogonal, Vector};
use crate::splittings::{DysParams, Method, Pdhg3Params, PpxaParams, Ryu3Params, Splitting};

pub use crate::operators::tv_pair_prox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    DenoiseL1,
    Portfolio,
    PoissonTv,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::DenoiseL1 => "denoise_l1",
            ProblemKind::Portfolio => "portfolio",
            ProblemKind::PoissonTv => "poisson_tv",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "denoise_l1" | "denoise" => Ok(ProblemKind::DenoiseL1),
            "portfolio" => Ok(ProblemKind::Portfolio),
            "poisson_tv" | "poisson" => Ok(ProblemKind::PoissonTv),
            other => Err(invalid(format!("unknown problem kind {other:?}"))),
        }
    }
}

/// Size and weight parameters; `None` picks the desk-scale default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProblemParams {
    /// Signal length, or number of assets for the portfolio.
    pub dim: Option<usize>,
    /// Number of return samples (portfolio only).
    pub samples: Option<usize>,
    /// Weight of the second term (denoising) or the likelihood (Poisson).
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProblemData {
    DenoiseL1 {
        lambda: f64,
        /// Observed indices `S`, sorted.
        mask: Vec<usize>,
        /// Observations of `x_S`.
        a: Vec<f64>,
        /// Observations of `U x`.
        b: Vec<f64>,
        truth: Vec<f64>,
    },
    Portfolio {
        /// Row `i` is the return sample `a_i`.
        returns: Vec<Vec<f64>>,
        mu: Vec<f64>,
        target: f64,
    },
    PoissonTv {
        lambda: f64,
        counts: Vec<f64>,
        rate: Vec<f64>,
    },
}

/// A generated problem and its three operators `(A, B, C)`.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub seed: u64,
    pub data: ProblemData,
    #[serde(skip)]
    ops: [Arc<MonotoneOp>; 3],
}

/// Independent generator streams derived from one seed.
struct Streams(SplitMix64);

impl Streams {
    fn new(seed: u64) -> Self {
        Streams(SplitMix64::seed_from_u64(seed))
    }

    fn next(&mut self) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.0.next_u64())
    }
}

/// Levels drawn uniformly from `[lo, hi)` on `segments` random intervals.
fn piecewise_constant<R: Rng>(rng: &mut R, d: usize, segments: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut cuts: Vec<usize> = (1..d).collect();
    cuts.shuffle(rng);
    cuts.truncate(segments.saturating_sub(1).min(d.saturating_sub(1)));
    cuts.sort_unstable();
    cuts.push(d);
    let mut out = Vec::with_capacity(d);
    for &end in &cuts {
        let level = rng.random_range(lo..hi);
        out.resize(end, level);
    }
    out
}

/// Adds `N(0, scale^2)` to a random tenth of the entries.
fn add_outliers<R: Rng>(rng: &mut R, v: &mut [f64], scale: f64) {
    let normal = Normal::new(0.0, scale).expect("positive scale");
    let count = v.len().div_ceil(10);
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.shuffle(rng);
    for &i in &idx[..count] {
        v[i] += normal.sample(rng);
    }
}

pub fn generate(kind: ProblemKind, params: &ProblemParams, seed: u64) -> Result<ProblemSpec> {
    let mut streams = Streams::new(seed);
    match kind {
        ProblemKind::DenoiseL1 => {
            let d = params.dim.unwrap_or(1024);
            let lambda = params.lambda.unwrap_or(1.0);
            if d < 2 || !d.is_power_of_two() {
                return Err(Error::InfeasibleParams(format!("denoising needs a power-of-two length, got {d}")));
            }
            positive_param("lambda", lambda)?;
            let truth = piecewise_constant(&mut streams.next(), d, 8, 0.0, 5.0);
            let mut mask: Vec<usize> = (0..d).collect();
            mask.shuffle(&mut streams.next());
            mask.truncate((d as f64 / 5.0).round().max(1.0) as usize);
            mask.sort_unstable();
            let mut a: Vec<f64> = mask.iter().map(|&i| truth[i]).collect();
            add_outliers(&mut streams.next(), &mut a, 3.0);
            let transform = Orthogonal::haar(d)?;
            let mut b: Vec<f64> = transform.apply(&Vector::from_column_slice(&truth))?.iter().copied().collect();
            add_outliers(&mut streams.next(), &mut b, 3.0);
            let ops = [
                Arc::new(MonotoneOp::l1_offset(d, mask.clone(), Vector::from_column_slice(&a), 1.0)?),
                Arc::new(MonotoneOp::unitary_l1(transform, Vector::from_column_slice(&b), lambda)?),
                Arc::new(MonotoneOp::indicator_nonneg(d)?),
            ];
            Ok(ProblemSpec { kind, seed, data: ProblemData::DenoiseL1 { lambda, mask, a, b, truth }, ops })
        }
        ProblemKind::Portfolio => {
            let d = params.dim.unwrap_or(100);
            let n = params.samples.unwrap_or(300);
            if d < 2 || n == 0 {
                return Err(Error::InfeasibleParams(format!("portfolio needs >= 2 assets and >= 1 sample, got d={d}, n={n}")));
            }
            let mut rng = streams.next();
            let drift: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..0.1)).collect();
            let vol: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.3)).collect();
            let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
            let mut noise = streams.next();
            let returns: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|j| drift[j] + vol[j] * std_normal.sample(&mut noise)).collect())
                .collect();
            let mu: Vec<f64> = (0..d).map(|j| returns.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
            let best = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if best <= 0.0 {
                return Err(Error::InfeasibleParams("no asset has positive mean return".into()));
            }
            // the best single asset attains `best > target`
            let target = 0.8 * best;
            let rows = DMatrix::from_fn(n, d, |i, j| returns[i][j]);
            let ops = [
                Arc::new(MonotoneOp::quadratic_ls(rows, target)?),
                Arc::new(MonotoneOp::indicator_simplex(d)?),
                Arc::new(MonotoneOp::indicator_halfspace(Vector::from_column_slice(&mu), target)?),
            ];
            Ok(ProblemSpec { kind, seed, data: ProblemData::Portfolio { returns, mu, target }, ops })
        }
        ProblemKind::PoissonTv => {
            let d = params.dim.unwrap_or(1001);
            let lambda = params.lambda.unwrap_or(1.0);
            if d < 3 || d % 2 == 0 {
                return Err(Error::InfeasibleParams(format!("Poisson TV needs an odd length >= 3, got {d}")));
            }
            positive_param("lambda", lambda)?;
            let rate = piecewise_constant(&mut streams.next(), d, 6, 1.0, 20.0);
            let mut rng = streams.next();
            let counts: Vec<f64> = rate
                .iter()
                .map(|&r| Poisson::new(r).expect("positive rate").sample(&mut rng).round())
                .collect();
            let ops = [
                Arc::new(MonotoneOp::poisson_nll(Vector::from_column_slice(&counts), lambda)?),
                Arc::new(MonotoneOp::pair_tv(d, 0)?),
                Arc::new(MonotoneOp::pair_tv(d, 1)?),
            ];
            Ok(ProblemSpec { kind, seed, data: ProblemData::PoissonTv { lambda, counts, rate }, ops })
        }
    }
}

fn positive_param(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InfeasibleParams(format!("{name} must be positive, got {v}")))
    }
}

/// Objective split into its finite part and the largest constraint violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    /// Finite terms, with indicators read as zero.
    pub finite: f64,
    /// Largest violation of an indicator constraint, 0 when feasible.
    pub slack: f64,
}

impl ObjectiveValue {
    /// Exact value: `+inf` when any constraint is violated.
    pub fn value(&self) -> f64 {
        if self.slack > 0.0 {
            f64::INFINITY
        } else {
            self.finite
        }
    }
}

fn nonneg_slack(x: &Vector) -> f64 {
    x.iter().fold(0.0, |m, &v| if -v > m { -v } else { m })
}

impl ProblemSpec {
    pub fn operators(&self) -> &[Arc<MonotoneOp>; 3] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn objective(&self, x: &Vector) -> Result<ObjectiveValue> {
        crate::error::check_dim(self.dim(), x.len())?;
        Ok(match &self.data {
            ProblemData::DenoiseL1 { lambda, mask, a, b, .. } => {
                let fit: f64 = mask.iter().zip(a).map(|(&i, &ai)| (x[i] - ai).abs()).sum();
                let ux = Orthogonal::haar(x.len())?.apply(x)?;
                let wave: f64 = ux.iter().zip(b).map(|(u, bi)| (u - bi).abs()).sum();
                ObjectiveValue { finite: fit + lambda * wave, slack: nonneg_slack(x) }
            }
            ProblemData::Portfolio { returns, mu, target } => {
                let ls: f64 = returns
                    .iter()
                    .map(|r| {
                        let v: f64 = r.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() - target;
                        0.5 * v * v
                    })
                    .sum();
                let sum_gap = (x.sum() - 1.0).abs();
                let ret: f64 = mu.iter().zip(x.iter()).map(|(m, v)| m * v).sum();
                let slack = [sum_gap, target - ret].into_iter().fold(nonneg_slack(x), |m, v| if v > m { v } else { m });
                ObjectiveValue { finite: ls, slack }
            }
            ProblemData::PoissonTv { lambda, counts, .. } => {
                let mut nll = 0.0;
                let mut slack: f64 = 0.0;
                for (&xi, &yi) in x.iter().zip(counts) {
                    if yi > 0.0 {
                        nll += if xi > 0.0 { xi - yi * xi.ln() } else { f64::INFINITY };
                    } else {
                        nll += xi;
                        if -xi > slack {
                            slack = -xi;
                        }
                    }
                }
                let tv: f64 = x.as_slice().windows(2).map(|w| (w[1] - w[0]).abs()).sum();
                ObjectiveValue { finite: lambda * nll + tv, slack }
            }
        })
    }

    /// Finite part of [`ProblemSpec::objective`], `+inf` on a dimension error.
    pub fn objective_finite(&self, x: &Vector) -> f64 {
        self.objective(x).map_or(f64::INFINITY, |o| o.finite)
    }

    /// JSON dump `{"kind": ..., "seed": ..., "data": {...}}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("problem data is serializable")
    }

    /// Methods compared on this problem, with step sizes chosen for its scale.
    pub fn default_methods(&self) -> Vec<Method> {
        let third = [1.0 / 3.0; 3];
        match &self.data {
            ProblemData::DenoiseL1 { .. } => vec![
                Method::Ryu3(Ryu3Params { alpha: 1.0, theta: 0.5 }),
                Method::Ppxa(PpxaParams { gamma: 1.0, weights: third, theta: 1.0 }),
                Method::Pdhg3(Pdhg3Params { tau: 0.5, sigma: 1.0 }),
            ],
            ProblemData::Portfolio { .. } => {
                let (rows, _) = self.ops[0].least_squares_parts().expect("portfolio A is least squares");
                let lipschitz = rows.tr_mul(rows).symmetric_eigenvalues().max();
                let alpha = 1.0 / lipschitz;
                vec![
                    Method::Ryu3(Ryu3Params { alpha, theta: 0.5 }),
                    Method::Ppxa(PpxaParams { gamma: alpha, weights: third, theta: 1.0 }),
                    Method::Dys(DysParams { alpha }),
                ]
            }
            ProblemData::PoissonTv { .. } => vec![
                Method::Ryu3(Ryu3Params { alpha: 1.0, theta: 0.5 }),
                Method::Ppxa(PpxaParams { gamma: 1.0, weights: third, theta: 1.0 }),
                Method::Pdhg3(Pdhg3Params { tau: 0.5, sigma: 1.0 }),
            ],
        }
    }

    /// Binds `method` to the operators. Forward-evaluated methods receive
    /// the single-valued operator last.
    pub fn splitting(&self, method: Method) -> Result<Splitting> {
        let ops = self.ops.to_vec();
        Splitting::new(method, order_for(&method, ops))
    }
}

/// Moves a single-valued operator to the last slot for forward-evaluated
/// methods; other methods keep the given order.
fn order_for(method: &Method, mut ops: Vec<Arc<MonotoneOp>>) -> Vec<Arc<MonotoneOp>> {
    if let Method::Dys(_) = method {
        if !ops[2].is_single_valued() {
            if let Some(i) = ops.iter().position(|o| o.is_single_valued()) {
                let op = ops.remove(i);
                ops.push(op);
            }
        }
    }
    ops
}

/// One method's run on a problem.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub outcome: IterationOutcome,
    pub objective: ObjectiveValue,
}

/// Runs each method from the origin on the operators `ops`, optionally on
/// one thread per method.
pub fn run_methods(
    ops: &[Arc<MonotoneOp>; 3],
    methods: &[Method],
    cfg: &IterationConfig,
    metrics: Metrics<'_>,
    parallel: bool,
) -> Result<Vec<IterationOutcome>> {
    let splittings = methods
        .iter()
        .map(|m| Splitting::new(*m, order_for(m, ops.to_vec())))
        .collect::<Result<Vec<_>>>()?;
    let run = |s: &Splitting| iterate(|z| s.step(z), s.initial_point(), cfg, metrics);
    if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = splittings.iter().map(|s| scope.spawn(move || run(s))).collect();
            handles.into_iter().map(|h| h.join().expect("method thread panicked")).collect()
        })
    } else {
        splittings.iter().map(run).collect()
    }
}

/// Runs `methods` on `spec` with the objective traced and, when given, the
/// distance to `reference`.
pub fn run_experiment(
    spec: &ProblemSpec,
    methods: &[Method],
    cfg: &IterationConfig,
    reference: Option<&Vector>,
    parallel: bool,
) -> Result<Vec<MethodRun>> {
    let objective = |x: &Vector| spec.objective_finite(x);
    let metrics = Metrics { objective: Some(&objective), reference };
    let outcomes = run_methods(&spec.ops, methods, cfg, metrics, parallel)?;
    methods
        .iter()
        .zip(outcomes)
        .map(|(m, outcome)| {
            let objective = spec.objective(&outcome.solution)?;
            Ok(MethodRun { method: *m, outcome, objective })
        })
        .collect()
}

/// Aligned text table: method, status, iterations, objective, slack, first
/// iteration with `rel_change < 1e-6`.
pub fn summary_table(runs: &[MethodRun]) -> String {
    let mut out = format!(
        "{:<8} {:<10} {:>8} {:>18} {:>10} {:>12}\n",
        "method", "status", "iters", "objective", "slack", "rel<1e-6 at"
    );
    for r in runs {
        let hit = r.outcome.trace.first_rel_change_below(1e-6).map_or("-".to_string(), |k| k.to_string());
        out += &format!(
            "{:<8} {:<10} {:>8} {:>18.10e} {:>10.2e} {:>12}\n",
            r.method.name(),
            r.outcome.status.to_string(),
            r.outcome.iterations,
            r.objective.finite,
            r.objective.slack,
            hit
        );
    }
    out
}
