use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rpsflow_cli::{commands, CliError, RunArgs, RunConfig, SweepSpec};

/// Experiments with the rock-paper-scissors game under environmental feedback.
///
/// Exit status: 0 success, 1 invalid input, 2 a verification check failed,
/// 3 the integration itself failed.
#[derive(Debug, Parser)]
#[command(name = "rpsflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV or JSONL
    Simulate(RunArgs),
    /// Check conservation, divergence, chart round-trip, equilibrium and two-space agreement
    Verify(RunArgs),
    /// Integrate and report returns to the initial state
    Recur(RunArgs),
    /// Repeat a run for each feedback strength in a list
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Comma-separated mu values; overrides the [sweep] table
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        mu_grid: Option<Vec<f64>>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(&RunConfig::resolve(&args)?),
        Command::Verify(args) => commands::verify(&RunConfig::resolve(&args)?),
        Command::Recur(args) => commands::recur(&RunConfig::resolve(&args)?),
        Command::Sweep { args, mu_grid } => {
            let mut cfg = match &args.config {
                Some(path) => RunConfig::from_file(path)?,
                None => RunConfig::default(),
            };
            cfg.apply(&args);
            if let Some(mu) = mu_grid {
                cfg.sweep = Some(SweepSpec { mu });
            }
            cfg.validate()?;
            commands::sweep(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
