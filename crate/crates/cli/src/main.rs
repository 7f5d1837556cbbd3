//! Batch runner: each command writes a CSV report and a JSON summary.

// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use restart_grade::cache::Cache;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use commands::{
    BmArgs, BoundsArgs, CommandArgs, DiskArgs, GradeArgs, KernelArgs, McArgs, VerifyArgs,
};
use config::{merge, read_config};
use error::CliError;
use report::Report;

const THREADS_ENV: &str = "RESTART_GRADE_THREADS";

#[derive(Parser)]
#[command(
    name = "restart-grade",
    version,
    about = "Optimal-restart hitting times of lattice random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the grade of one or more start points
    Grade(GradeArgs),
    /// Envelope-based lower and upper bounds on the grade
    Bounds(BoundsArgs),
    /// Monte Carlo estimates of hitting times under restart strategies
    Mc(McArgs),
    /// Hitting times of the origin in a planar disk, with bounds
    Disk(DiskArgs),
    /// Closed-form grades of Brownian motion targeting a ball
    Bm(BmArgs),
    /// Potential kernel or Green function values
    Kernel(KernelArgs),
    /// Run verification suites and report every check
    Verify(VerifyArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

fn execute<T>(
    name: &str,
    flags: T,
    run: fn(&T, Option<Cache>) -> Result<Report, CliError>,
) -> Result<(), CliError>
where
    T: CommandArgs + Serialize + DeserializeOwned + Default,
{
    let started = Instant::now();
    let file = flags
        .common()
        .config
        .as_deref()
        .map(read_config)
        .transpose()?;
    let args = merge(&flags, file)?;
    let common = args.common().clone();
    let report = run(&args, commands::cache_of(&common))?;
    report.write_csv(common.out.as_deref())?;

    let summary = json!({
        "command": name,
        "inputs": args,
        "outputs": report.outputs,
        "version": {
            "restart-grade-cli": env!("CARGO_PKG_VERSION"),
            "restart-grade": restart_grade::VERSION,
        },
        "timings": { "total_seconds": started.elapsed().as_secs_f64() },
    });
    let summary_path: Option<PathBuf> = common
        .summary
        .clone()
        .or_else(|| common.out.as_ref().map(|p| p.with_extension("json")));
    match summary_path {
        Some(p) => std::fs::write(p, serde_json::to_string_pretty(&summary)? + "\n")?,
        None => eprintln!("{summary}"),
    }
    match report.failed_checks {
        Some((failed, total)) => Err(CliError::ChecksFailed { failed, total }),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Grade(a) => execute("grade", a, commands::grade),
        Command::Bounds(a) => execute("bounds", a, commands::bounds),
        Command::Mc(a) => execute("mc", a, commands::mc),
        Command::Disk(a) => execute("disk", a, commands::disk),
        Command::Bm(a) => execute("bm", a, commands::bm),
        Command::Kernel(a) => execute("kernel", a, commands::kernel),
        Command::Verify(a) => execute("verify", a, commands::verify),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
