use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use resplit::engine::{iterate, IterationConfig, Metrics, Status};
use resplit::operators::OperatorSpec;
use resplit::splittings::{DysParams, FamilyParams, Pdhg3Params, PpxaParams, Ryu3Params};
use resplit::{Error, LiftedPoint, Method, Splitting, Vector};
use serde::Deserialize;

use crate::{Context, Format, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Ppm,
    Drs,
    Prs,
    Family,
    Ppxa,
    Ryu3,
    Dys,
    Pdhg3,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Splitting method.
    #[arg(long, value_enum)]
    method: MethodName,
    /// JSON file: a list of operators, or {"operators": [...], "z0": [[...], ...]}.
    #[arg(long)]
    problem: PathBuf,
    /// Step α of the first resolvent (ppm, drs, prs, family, ryu3, dys).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Step β of the second resolvent (family); defaults to α.
    #[arg(long)]
    beta: Option<f64>,
    /// Relaxation θ. Defaults: 1 for drs/family/ppxa, 0.5 for ryu3; prs fixes θ = 2.
    #[arg(long)]
    theta: Option<f64>,
    /// Solution weight η in S z = η x1 + (1 − η) x2 (family).
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// PPXA step γ; defaults to α.
    #[arg(long)]
    gamma: Option<f64>,
    /// PDHG primal step τ.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// PDHG dual step σ (needs 2τσ ≤ 1).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Stop once the fixed-point residual ‖Tz − z‖ is at most this.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Iterates with ‖z‖ at or above this count as diverged.
    #[arg(long, default_value_t = 1e12)]
    divergence_bound: f64,
    /// Record every k-th iteration in the trace.
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Write the trace as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Fill the elapsed_ns trace column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemFile {
    Bare(Vec<OperatorSpec>),
    Full { operators: Vec<OperatorSpec>, z0: Option<Vec<Vec<f64>>> },
}

impl RunArgs {
    fn method(&self) -> Method {
        let alpha = self.alpha;
        match self.method {
            MethodName::Ppm => Method::Ppm { alpha },
            MethodName::Drs => Method::Family(FamilyParams::drs(alpha, self.theta.unwrap_or(1.0))),
            MethodName::Prs => Method::Family(FamilyParams::prs(alpha)),
            MethodName::Family => Method::Family(FamilyParams {
                alpha,
                beta: self.beta.unwrap_or(alpha),
                theta: self.theta.unwrap_or(1.0),
                eta: self.eta,
            }),
            MethodName::Ppxa => Method::Ppxa(PpxaParams {
                gamma: self.gamma.unwrap_or(alpha),
                weights: [1.0 / 3.0; 3],
                theta: self.theta.unwrap_or(1.0),
            }),
            MethodName::Ryu3 => Method::Ryu3(Ryu3Params { alpha, theta: self.theta.unwrap_or(0.5) }),
            MethodName::Dys => Method::Dys(DysParams { alpha }),
            MethodName::Pdhg3 => Method::Pdhg3(Pdhg3Params { tau: self.tau, sigma: self.sigma }),
        }
    }
}

fn format_vector(v: &Vector) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.12e}")).collect();
    format!("[{}]", cells.join(", "))
}

pub fn execute(ctx: &Context, args: RunArgs) -> Result<Outcome, Error> {
    let text = std::fs::read_to_string(&args.problem)?;
    let (specs, z0) = match serde_json::from_str::<ProblemFile>(&text)? {
        ProblemFile::Bare(ops) => (ops, None),
        ProblemFile::Full { operators, z0 } => (operators, z0),
    };
    let ops = specs.iter().map(|s| s.build().map(Arc::new)).collect::<Result<Vec<_>, _>>()?;
    let method = args.method();
    let splitting = Splitting::new(method, ops)?;
    for w in splitting.warnings() {
        eprintln!("warning: {w}");
    }
    let start = match z0 {
        Some(blocks) => LiftedPoint::new(blocks.iter().map(|b| Vector::from_column_slice(b)).collect())?,
        None => splitting.initial_point(),
    };
    let cfg = IterationConfig {
        max_iters: args.max_iters,
        fp_tol: args.tol,
        divergence_bound: args.divergence_bound,
        record_every: args.record_every,
        timing: args.timing,
    };
    let out = iterate(|z| splitting.step(z), start, &cfg, Metrics::default())?;

    let csv = out.trace.to_csv_string();
    if let Some(path) = &args.trace {
        std::fs::write(path, &csv)?;
    }
    ctx.write_output(&format!("{}.csv", method.name()), &csv)?;

    match ctx.format {
        Format::Text => {
            println!("method:     {}", method.name());
            println!("status:     {}", out.status);
            println!("iterations: {}", out.iterations);
            println!("residual:   {:.6e}", out.final_residual);
            println!("solution:   {}", format_vector(&out.solution));
        }
        Format::Json => {
            let v = serde_json::json!({
                "method": method,
                "status": out.status,
                "iterations": out.iterations,
                "residual": out.final_residual,
                "solution": out.solution.iter().copied().collect::<Vec<f64>>(),
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Format::Csv => print!("{csv}"),
    }
    Ok(if out.status == Status::Converged { Outcome::Success } else { Outcome::Failed })
}
