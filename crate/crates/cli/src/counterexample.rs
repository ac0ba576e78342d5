use clap::{Args, Subcommand};
use resplit::counterexamples::{rotation_growth_row, theta_range_growth, theta_range_iterates, GrowthRow, RotationPair};
use resplit::Error;

use crate::{Context, Format, Outcome};

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    #[command(subcommand)]
    kind: Kind,
}

#[derive(Subcommand, Debug)]
enum Kind {
    /// Skew pair A = (tan ω / α) K, B = −(tan ω / β) K; the family map grows
    /// every nonzero start when α ≠ β.
    Rotation {
        /// Step α of the resolvent of A.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Step β of the resolvent of B.
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// Angle ω in (0, π/2).
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        omega: f64,
        /// Relaxation θ.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        theta: f64,
        /// Number of iterations averaged over.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Ambient dimension (the pair acts on the first two coordinates).
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// DRS with relaxation θ on (0, normal cone of {0}): z^k = (1 − θ)^k z^0.
    ThetaRange {
        /// Relaxation θ.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 20)]
        iters: usize,
    },
}

/// Agreement required between measured and predicted growth.
const GROWTH_TOL: f64 = 1e-8;

fn rotation_output(ctx: &Context, row: &GrowthRow) -> Result<String, Error> {
    Ok(match ctx.format {
        Format::Text => format!(
            "{:>8} {:>8} {:>10} {:>8} {:>14} {:>14} {:>10} {:>14}\n{:>8} {:>8} {:>10.6} {:>8} {:>14.10} {:>14.10} {:>10.3e} {:>14.10}\n",
            "alpha", "beta", "omega", "theta", "predicted", "measured", "|error|", "spectral",
            row.alpha, row.beta, row.omega, row.theta, row.predicted, row.measured, row.error, row.spectral
        ),
        Format::Csv => format!(
            "alpha,beta,omega,theta,predicted,measured,error,spectral\n{},{},{},{},{},{},{},{}\n",
            row.alpha, row.beta, row.omega, row.theta, row.predicted, row.measured, row.error, row.spectral
        ),
        Format::Json => serde_json::to_string_pretty(row)? + "\n",
    })
}

pub fn execute(ctx: &Context, args: CounterexampleArgs) -> Result<Outcome, Error> {
    match args.kind {
        Kind::Rotation { alpha, beta, omega, theta, iters, dim } => {
            let pair = RotationPair::new(alpha, beta, omega, dim)?;
            let row = rotation_growth_row(&pair, theta, iters)?;
            let text = rotation_output(ctx, &row)?;
            print!("{text}");
            ctx.write_output("rotation.txt", &text)?;
            let agrees = row.error <= GROWTH_TOL;
            if !agrees {
                eprintln!(
                    "measured growth differs from the predicted value by {:.3e} (> {GROWTH_TOL:e})",
                    row.error
                );
            }
            let diverges = row.measured > 1.0 + 1e-12;
            Ok(if agrees && !diverges { Outcome::Success } else { Outcome::Failed })
        }
        Kind::ThetaRange { theta, iters } => {
            let zs = theta_range_iterates(theta, 1.0, iters)?;
            let growth = theta_range_growth(theta, iters.max(1))?;
            let text = match ctx.format {
                Format::Json => {
                    serde_json::to_string_pretty(&serde_json::json!({"theta": theta, "measured": growth, "iterates": zs}))?
                        + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("k,z\n");
                    for (k, z) in zs.iter().enumerate() {
                        s += &format!("{k},{z}\n");
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!("theta = {theta}, measured growth |z^(k+1)| / |z^k| = {growth}\n");
                    for (k, z) in zs.iter().enumerate() {
                        s += &format!("{k:>4} {z:>24.16e}\n");
                    }
                    s
                }
            };
            print!("{text}");
            ctx.write_output("theta_range.txt", &text)?;
            Ok(if growth > 1.0 { Outcome::Failed } else { Outcome::Success })
        }
    }
}
