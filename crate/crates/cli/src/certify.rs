use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use resplit::certificate::{
    build_family_system, build_ppxa_system, build_ryu3_system, family_coefficients, impossibility_probe,
    random_no_lifting_candidate, rat, verify_encoding, EncodingTargets, ProbeReport, Rational, ScalarBlockSystem,
};
use resplit::Error;

use crate::{rational_arg, Context, Format, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemName {
    Family,
    Ryu3,
    Ppxa,
    File,
}

/// Rationals are written as `p`, `p/q` or finite decimals.
#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    system: SystemName,
    /// System description (JSON) for `--system file`.
    #[arg(long, required_if_eq("system", "file"))]
    file: Option<PathBuf>,
    /// Step α (family, ryu3).
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    alpha: Rational,
    /// Step β (family).
    #[arg(long, value_parser = rational_arg)]
    beta: Option<Rational>,
    /// Relaxation θ.
    #[arg(long, value_parser = rational_arg, default_value = "1", allow_hyphen_values = true)]
    theta: Rational,
    /// Solution weight η (family).
    #[arg(long, value_parser = rational_arg, default_value = "0", allow_hyphen_values = true)]
    eta: Rational,
    /// Step γ (ppxa).
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    gamma: Rational,
    /// Override θ1 (family); unset coefficients take the values derived from α, β, θ, η.
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta1: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta2: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta3: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta4: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta5: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta6: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta7: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    theta8: Option<Rational>,
    /// Also run the no-lifting probe on the system (needs resolvents of A, B and C).
    #[arg(long)]
    probe: bool,
    /// Probe this many random no-lifting three-operator candidates (seeded by --seed).
    #[arg(long, default_value_t = 0)]
    random_trials: usize,
    /// Resolvent evaluations per operator in the random candidates.
    #[arg(long, default_value_t = 1)]
    per_operator: usize,
    /// Leave out the rows equating repeated resolvents of the same operator.
    #[arg(long)]
    no_within_consensus: bool,
}

impl CertifyArgs {
    fn system(&self) -> Result<ScalarBlockSystem, Error> {
        match self.system {
            SystemName::Family => {
                let beta = self.beta.clone().unwrap_or_else(|| self.alpha.clone());
                let mut t = family_coefficients(&self.alpha, &beta, &self.theta, &self.eta);
                let overrides = [
                    &self.theta1,
                    &self.theta2,
                    &self.theta3,
                    &self.theta4,
                    &self.theta5,
                    &self.theta6,
                    &self.theta7,
                    &self.theta8,
                ];
                for (slot, o) in t.iter_mut().zip(overrides) {
                    if let Some(v) = o {
                        *slot = v.clone();
                    }
                }
                build_family_system(&self.alpha, &beta, &t)
            }
            SystemName::Ryu3 => build_ryu3_system(&self.alpha, &self.theta),
            SystemName::Ppxa => build_ppxa_system(&self.gamma, &[rat(1, 3), rat(1, 3), rat(1, 3)], &self.theta),
            SystemName::File => {
                let path = self.file.as_ref().expect("clap enforces --file");
                ScalarBlockSystem::from_json(&std::fs::read_to_string(path)?)
            }
        }
    }
}

fn probe_text(label: &str, p: &ProbeReport) -> String {
    format!(
        "{label}: x_A = x_B {}, x_B = x_C {}, output constraints {} of {} needed ({} from within-operator rows)\n",
        if p.a_equals_b { "implied" } else { "not implied" },
        if p.b_equals_c { "implied" } else { "not implied" },
        p.output_constraint_rank,
        p.needed_rank,
        p.within_rank,
    )
}

pub fn execute(ctx: &Context, args: CertifyArgs) -> Result<Outcome, Error> {
    let sys = args.system()?;
    let report = verify_encoding(&sys, &EncodingTargets::standard(&sys)?)?;
    let within = !args.no_within_consensus;
    let probe = if args.probe { Some(impossibility_probe(&sys, within)?) } else { None };

    let mut trials = Vec::new();
    if args.random_trials > 0 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(ctx.seed);
        for _ in 0..args.random_trials {
            let cand = random_no_lifting_candidate(&mut rng, args.per_operator)?;
            trials.push(impossibility_probe(&cand, within)?);
        }
    }
    let both_count = trials.iter().filter(|p| p.both()).count();

    let json = serde_json::json!({
        "system": format!("{:?}", args.system).to_lowercase(),
        "encoding": report.to_json(&sys),
        "probe": probe,
        "random_trials": if trials.is_empty() { serde_json::Value::Null } else { serde_json::json!({
            "trials": trials.len(),
            "per_operator": args.per_operator,
            "within_consensus": within,
            "both_implied": both_count,
        })},
    });
    ctx.write_output("certificate.json", &serde_json::to_string_pretty(&json)?)?;
    ctx.write_output("system.json", &sys.to_json())?;

    match ctx.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json)?),
        Format::Text | Format::Csv => {
            print!("{}", report.to_text(&sys));
            if let Some(p) = &probe {
                print!("{}", probe_text("probe", p));
            }
            if !trials.is_empty() {
                println!(
                    "random no-lifting candidates: {} of {} imply both consensus equalities",
                    both_count,
                    trials.len()
                );
            }
            println!("{}", if report.all_hold() { "encoding: certified" } else { "encoding: FAILED" });
        }
    }
    Ok(if report.all_hold() && both_count == 0 { Outcome::Success } else { Outcome::Failed })
}
