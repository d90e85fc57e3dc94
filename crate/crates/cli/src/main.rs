//! `mfc-lab`: runs one experiment per invocation and writes `results.csv`,
//! `summary.json` and `MANIFEST` into the output directory.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a solver
//! diverges (with `diagnostic.json`), 2 for usage and configuration errors.

mod artifacts;
mod config;
mod experiments;
mod report;

use anyhow::Result;
use artifacts::{write_run, RunOutput, Summary, SCHEMA};
use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use mfc_lab::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "mfc-lab", version, about = "N-particle and mean-field control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled assumption checks of a catalog model.
    CheckModel(RunArgs),
    /// Grid solves of the N-particle value function.
    SolveN(RunArgs),
    /// Mean-field control from a Gaussian initial density.
    SolveMf(RunArgs),
    /// Convergence rate of V^N to U via the reduced equation.
    Rate(RunArgs),
    /// Concentration of diffusing empirical measures.
    Concentration(RunArgs),
    /// Sampling rate of i.i.d. empirical measures.
    FournierGuillin(RunArgs),
    /// Partition of feedback values and its Hamiltonian residual.
    PartitionDemo(RunArgs),
    /// Sub-Gaussian tail of a Lipschitz statistic.
    Tail(RunArgs),
    /// The acceptance suite.
    Accept(RunArgs),
    /// Merge the summaries under a directory into report.md and report.csv.
    Report {
        /// Directory holding run subdirectories.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default `runs/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

type Runner = fn(&mut ExperimentConfig, u64) -> Result<RunOutput>;

impl Command {
    fn parts(&self) -> Option<(&'static str, Runner, &RunArgs)> {
        let p: (&'static str, Runner, &RunArgs) = match self {
            Command::CheckModel(a) => ("check-model", experiments::check_model, a),
            Command::SolveN(a) => ("solve-n", experiments::solve_n, a),
            Command::SolveMf(a) => ("solve-mf", experiments::solve_mf, a),
            Command::Rate(a) => ("rate", experiments::rate, a),
            Command::Concentration(a) => ("concentration", experiments::concentration, a),
            Command::FournierGuillin(a) => ("fournier-guillin", experiments::fournier_guillin_run, a),
            Command::PartitionDemo(a) => ("partition-demo", experiments::partition_demo, a),
            Command::Tail(a) => ("tail", experiments::tail, a),
            Command::Accept(a) => ("accept", experiments::accept, a),
            Command::Report { .. } => return None,
        };
        Some(p)
    }
}

/// How a failed run is reported.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn classify(err: anyhow::Error) -> Failure {
    let usage = err.chain().any(|c| {
        c.is::<serde_json::Error>()
            || matches!(
                c.downcast_ref::<Error>(),
                Some(
                    Error::InvalidConfig(_)
                        | Error::UnknownModel(_)
                        | Error::DimensionMismatch { .. }
                        | Error::Unsupported(_)
                        | Error::GridTooLarge { .. }
                        | Error::NetTooLarge { .. }
                        | Error::NotLipschitz { .. }
                        | Error::InsufficientData(_)
                )
            )
    });
    if usage {
        Failure::Usage(err)
    } else {
        Failure::Runtime(err)
    }
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    match err.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Divergence(_)) => "divergence",
        Some(Error::StepRestriction { .. }) => "step-restriction",
        Some(Error::DomainExit { .. }) => "domain-exit",
        Some(Error::SupremumAtBoundary { .. }) => "supremum-at-boundary",
        Some(Error::Io(_)) | Some(Error::Csv(_)) => "io",
        _ => "runtime",
    }
}

fn write_diagnostic(out: &Path, experiment: &str, seed: u64, err: &anyhow::Error) {
    let diag = serde_json::json!({
        "schema": SCHEMA,
        "experiment": experiment,
        "seed": seed,
        "kind": error_kind(err),
        "message": format!("{err:#}"),
    });
    let text = serde_json::to_string_pretty(&diag).unwrap_or_default();
    eprintln!("{text}");
    if std::fs::create_dir_all(out).is_ok() {
        let _ = std::fs::write(out.join("diagnostic.json"), text + "\n");
    }
}

fn run(name: &str, runner: Runner, args: &RunArgs) -> Result<bool, Failure> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(anyhow::anyhow!("--threads: {e}")))?;
    }
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p).map_err(Failure::Usage)?,
        None => ExperimentConfig::default(),
    };
    let out_dir = args.out.clone().unwrap_or_else(|| Path::new("runs").join(name));
    let start = Instant::now();
    let output = runner(&mut cfg, args.seed).map_err(|e| match classify(e) {
        Failure::Runtime(e) => {
            write_diagnostic(&out_dir, name, args.seed, &e);
            Failure::Runtime(e)
        }
        usage => usage,
    })?;
    let summary = Summary {
        schema: SCHEMA,
        experiment: name.to_string(),
        seed: args.seed,
        threads: args.threads,
        wall_seconds: start.elapsed().as_secs_f64(),
        config: cfg,
        rates: output.rates.clone(),
        checks: output.checks.clone(),
        metrics: output.metrics.clone(),
        pass: output.pass(),
    };
    let inputs: Vec<PathBuf> = args.config.iter().cloned().collect();
    write_run(&out_dir, &summary, &output.table, &inputs).map_err(Failure::Runtime)?;
    for c in summary.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    println!("{}: {} ({})", name, if summary.pass { "pass" } else { "fail" }, out_dir.display());
    Ok(summary.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Report { dir } => report::emit_report(dir)
            .map(|rows| {
                println!("report: {rows} rows in {}", dir.join("report.md").display());
                true
            })
            .map_err(classify),
        cmd => {
            let (name, runner, args) = cmd.parts().expect("run subcommand");
            run(name, runner, args)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
