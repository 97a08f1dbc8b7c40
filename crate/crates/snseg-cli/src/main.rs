//! `snseg`: change-point segmentation, critical-value table generation,
//! benchmark simulation and replication scoring from the command line.

use clap::{Parser, Subcommand};
use snseg_cli::commands;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "snseg",
    version,
    about = "Self-normalized change-point estimation for time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate change-points in a CSV time series.
    Segment(commands::segment::SegmentArgs),
    /// Simulate critical-value tables for the null distributions.
    Critval(commands::critval::CritvalArgs),
    /// Generate a benchmark model realization (CSV plus truth sidecar).
    Simulate(commands::simulate::SimulateArgs),
    /// Run seeded replications of a benchmark model end to end and
    /// summarize estimation accuracy.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Score externally produced change-point sets against their truths.
    Score(commands::score::ScoreArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(args) => commands::segment::run(args),
        Command::Critval(args) => commands::critval::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Score(args) => commands::score::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
