use clap::{Args, ValueEnum};
use resplit::engine::{compute_reference, IterationConfig, Status};
use resplit::experiments::{generate, run_experiment, summary_table, ProblemKind, ProblemParams};
use resplit::Error;

use crate::{Context, Format, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    Denoise,
    Portfolio,
    Poisson,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    problem: ProblemName,
    /// Signal length (denoise: power of two, poisson: odd) or number of assets.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of return samples (portfolio).
    #[arg(long)]
    samples: Option<usize>,
    /// Weight λ of the wavelet term (denoise) or the likelihood (poisson).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Fixed-point residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Run the methods on one thread each.
    #[arg(long)]
    threads: bool,
    /// Skip the long reference run (no dist_to_ref column).
    #[arg(long)]
    no_reference: bool,
    /// Fill the elapsed_ns trace column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

pub fn execute(ctx: &Context, args: ExperimentArgs) -> Result<Outcome, Error> {
    let kind = match args.problem {
        ProblemName::Denoise => ProblemKind::DenoiseL1,
        ProblemName::Portfolio => ProblemKind::Portfolio,
        ProblemName::Poisson => ProblemKind::PoissonTv,
    };
    let params = ProblemParams { dim: args.dim, samples: args.samples, lambda: args.lambda };
    let spec = generate(kind, &params, ctx.seed)?;
    ctx.write_output("problem.json", &spec.to_json())?;

    let cfg = IterationConfig {
        max_iters: args.max_iters,
        fp_tol: args.tol,
        record_every: args.record_every,
        timing: args.timing,
        ..Default::default()
    };
    let methods = spec.default_methods();
    // denoising solutions are not unique, so no distance is reported there
    let reference = if args.no_reference || kind == ProblemKind::DenoiseL1 {
        None
    } else {
        Some(compute_reference(&spec.splitting(methods[0])?, &cfg)?)
    };
    let runs = run_experiment(&spec, &methods, &cfg, reference.as_ref(), args.threads)?;

    for r in &runs {
        ctx.write_output(&format!("{}.csv", r.method.name()), &r.outcome.trace.to_csv_string())?;
    }
    let table = summary_table(&runs);
    ctx.write_output("summary.txt", &table)?;
    match ctx.format {
        Format::Text => print!("{table}"),
        Format::Csv => {
            println!("method,status,iterations,objective,slack");
            for r in &runs {
                println!(
                    "{},{},{},{},{}",
                    r.method.name(),
                    r.outcome.status,
                    r.outcome.iterations,
                    r.objective.finite,
                    r.objective.slack
                );
            }
        }
        Format::Json => {
            let rows: Vec<_> = runs
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "method": r.method,
                        "status": r.outcome.status,
                        "iterations": r.outcome.iterations,
                        "objective": r.objective.finite,
                        "slack": r.objective.slack,
                        "first_rel_change_below_1e-6": r.outcome.trace.first_rel_change_below(1e-6),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({"problem": kind, "seed": ctx.seed, "runs": rows}))?);
        }
    }
    let diverged = runs.iter().any(|r| r.outcome.status == Status::Diverged);
    Ok(if diverged { Outcome::Failed } else { Outcome::Success })
}
