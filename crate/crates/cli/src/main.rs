//! `concentrate`: predictions, simulations and comparisons for random walks
//! in high dimensions.

mod commands;
mod config;
mod error;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Flags;

#[derive(Debug, Parser)]
#[command(name = "concentrate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form predictions.
    Predict(Flags),
    /// Monte Carlo estimate of one observable.
    Simulate(Flags),
    /// Prediction against simulation; exits 1 on a failed verdict.
    Compare(Flags),
    /// Comparison rows over a swept dimension or step count.
    Table(Flags),
    /// Runs the acceptance battery with fixed seeds.
    Selftest(Flags),
}

type Runner = fn(&config::RunConfig) -> Result<u8, error::CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, run): (&Flags, Runner) = match &cli.command {
        Command::Predict(f) => (f, commands::predict_cmd),
        Command::Simulate(f) => (f, commands::simulate_cmd),
        Command::Compare(f) => (f, commands::compare_cmd),
        Command::Table(f) => (f, commands::table_cmd),
        Command::Selftest(f) => (f, commands::selftest_cmd),
    };
    match flags.resolve().and_then(|cfg| run(&cfg)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
