//! `liougap` — relaxation-gap experiments as CSV artifacts.
//!
//! Exit codes: 0 success/convergence, 1 malformed config or invocation
//! (nothing written), 2 non-convergence or a runtime failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::SweepAxis;
use config::{CliOverrides, ConfigError};

#[derive(Parser)]
#[command(
    name = "liougap",
    version,
    about = "Liouvillian gap of open quantum systems: variational solves, offset scans, \
             parameter sweeps, exact diagonalization, and numerical self-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the gap, assuming a unique steady state
    Gap(RunArgs),
    /// Solve with an offset scan, for possibly degenerate steady states
    GapDegenerate(RunArgs),
    /// Solve once per axis value and tabulate against exact diagonalization
    Sweep(SweepArgs),
    /// Print the exact spectrum and gap of the configured model
    Ed(RunArgs),
    /// Run the numerical self-check suite and report timings
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV artifacts (default: config `out`, else ".")
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Model parameter varied across the sweep
    #[arg(long, value_enum)]
    axis: Axis,
    /// Comma-separated axis values, e.g. 0.5,1,1.5,2
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Worker threads for sweep points (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Axis {
    /// Dissipation rate of every channel
    Gamma,
    /// Spin count
    #[value(name = "N", alias = "n")]
    SpinCount,
}

#[derive(Args)]
struct CheckArgs {
    /// Seed for the randomized checks
    #[arg(long, default_value_t = config::DEFAULT_SEED)]
    seed: u64,
}

fn overrides(args: &RunArgs, workers: Option<usize>) -> CliOverrides {
    CliOverrides { seed: args.seed, out: args.out.clone(), workers }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Gap(args) => {
            let resolved = config::load(&args.config, &overrides(&args, None))?;
            commands::cmd_gap(&resolved)
        }
        Command::GapDegenerate(args) => {
            let resolved = config::load(&args.config, &overrides(&args, None))?;
            commands::cmd_gap_degenerate(&resolved)
        }
        Command::Sweep(args) => {
            let resolved = config::load(&args.run.config, &overrides(&args.run, args.workers))?;
            let axis = match args.axis {
                Axis::Gamma => SweepAxis::Gamma,
                Axis::SpinCount => SweepAxis::SpinCount,
            };
            commands::cmd_sweep(&resolved, axis, &args.values)
        }
        Command::Ed(args) => {
            let resolved = config::load(&args.config, &overrides(&args, None))?;
            commands::cmd_ed(&resolved)
        }
        Command::Check(args) => commands::cmd_check(args.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here too; only real usage errors
            // should exit like a malformed config.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err.downcast_ref::<ConfigError>().is_some() { 1 } else { 2 };
            ExitCode::from(code)
        }
    }
}
