//! `resplit` command-line interface.

mod certify;
mod counterexample;
mod experiment;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use resplit::certificate::{parse_rational, Rational};
use resplit::Error;

#[derive(Parser, Debug)]
#[command(name = "resplit", version, about = "Resolvent splittings, encoding certificates and divergence witnesses")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate z <- T z for a splitting on operators read from a JSON file.
    Run(run::RunArgs),
    /// Check exactly whether a splitting's fixed-point system implies
    /// x1 = x2 (= x3), S z = x1 and a zero sum of operator outputs.
    Certify(certify::CertifyArgs),
    /// Divergence witnesses for the two-operator family.
    Counterexample(counterexample::CounterexampleArgs),
    /// Generate a seeded benchmark problem and compare methods on it.
    Experiment(experiment::ExperimentArgs),
}

/// Exit status of a subcommand that ran to completion.
pub enum Outcome {
    Success,
    Failed,
}

pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Context {
    /// Writes `contents` to `name` inside `--out`, creating the directory.
    pub fn write_output(&self, name: &str, contents: &str) -> Result<(), Error> {
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

pub fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter(_)
            | Error::Dimension { .. }
            | Error::MalformedSystem(_)
            | Error::SetValued(_)
            | Error::NotMonotone(_)
            | Error::NonPowerOfTwo(_)
            | Error::InfeasibleParams(_)
            | Error::ZeroStart
            | Error::Json(_)
            | Error::Io(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context { seed: cli.seed, out: cli.out, format: cli.format };
    let result = match cli.command {
        Command::Run(args) => run::execute(&ctx, args),
        Command::Certify(args) => certify::execute(&ctx, args),
        Command::Counterexample(args) => counterexample::execute(&ctx, args),
        Command::Experiment(args) => experiment::execute(&ctx, args),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
