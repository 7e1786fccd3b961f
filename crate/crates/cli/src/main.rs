//! `gradplay`: run, audit and bound distributed gradient play on quadratic games.
//!
//! Exit status is 0 when every enabled check passes, 1 when a check fails and
//! 2 on invalid input or runtime errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gradplay::harness::{self, AlphaSpec, AuditConfig, ExperimentConfig, OUT_DIR_ENV};
use gradplay::network::Topology;
use gradplay::theory::{self, BoundInputs, StepSizePlan};

#[derive(Parser)]
#[command(name = "gradplay", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace, summary and plot script.
    Run(RunArgs),
    /// Check every invariant over a matrix of sizes, topologies and seeds.
    Audit(AuditArgs),
    /// Print the step-size ceiling and rate bound for given constants.
    Bounds(BoundsArgs),
    /// Print the asymptotic rate comparison against GRANE.
    CompareGrane(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; fields it omits come from the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named base configuration (`paper-sim` or `default`).
    #[arg(long)]
    preset: Option<String>,
    /// `auto`, a number, or `capped:<v>`. Overrides the file.
    #[arg(long)]
    alpha: Option<AlphaSpec>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5, 10, 20])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    topologies: Vec<Topology>,
    /// Force this step size in every cell.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Print the full report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long = "L")]
    l: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    n: usize,
    /// Evaluate the rate at this step size instead of the default fraction.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long = "L")]
    l: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Audit(a) => audit(a),
        Command::Bounds(a) => bounds(a),
        Command::CompareGrane(a) => compare(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    if args.config.is_none() && args.preset.is_none() {
        anyhow::bail!("give --config <file>, --preset <name>, or both");
    }
    let base = match &args.preset {
        Some(name) => ExperimentConfig::preset(name)?,
        None => ExperimentConfig::default(),
    };
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml_over(&base, &text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => base,
    };
    if let Some(alpha) = args.alpha {
        config.alpha = alpha;
    }

    let report = harness::run_experiment(&config)?;
    for note in &report.notes {
        eprintln!("warning: {note}");
    }
    report
        .write_outputs(&args.out)
        .with_context(|| format!("writing outputs to {}", args.out.display()))?;
    print!("{}", report.summary_text());
    if let Some(v) = &report.violation {
        eprintln!(
            "check `{}` failed at iteration {} (relative slack {:e})",
            v.check, v.t, v.relative_slack
        );
    }
    Ok(report.passed())
}

fn audit(args: AuditArgs) -> Result<bool> {
    let config = AuditConfig {
        sizes: args.sizes,
        seeds: args.seeds,
        topologies: if args.topologies.is_empty() {
            Topology::ALL.to_vec()
        } else {
            args.topologies
        },
        alpha_override: args.alpha,
        max_iters: args.max_iters,
        ..AuditConfig::default()
    };
    let report = harness::audit(&config)?;
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
        if !report.passed() {
            eprintln!("{}", serde_json::to_string(&report.failures)?);
        }
    }
    Ok(report.passed())
}

fn bounds(args: BoundsArgs) -> Result<bool> {
    let plan = StepSizePlan::new(BoundInputs::new(args.mu, args.l, args.sigma, args.n), args.alpha)?;
    if args.json {
        println!("{}", plan.to_json());
    } else {
        print!("{}", plan.to_report());
    }
    Ok(true)
}

fn compare(args: CompareArgs) -> Result<bool> {
    let cmp = theory::grane_rate_comparison(args.mu, args.l, args.n, args.sigma)?;
    if args.json {
        println!("{}", cmp.to_json());
    } else {
        print!("{}", cmp.to_report());
    }
    Ok(true)
}
