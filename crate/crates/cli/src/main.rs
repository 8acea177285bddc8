//! Batch front end: closed-form sweeps (CRLB, performance loss, energy
//! efficiency), Monte Carlo RMSE experiments, and closed-form-vs-oracle
//! validation runs, all emitting self-describing CSV.

mod config;
mod output;
mod runs;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Cli, ResolvedConfig};

#[derive(Parser)]
#[command(name = "hadoa", version, about = "DOA bounds and estimation for hybrid mixed-ADC arrays")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form direction CRLB sweep
    Crlb(Cli),
    /// Performance-loss factor sweep
    Ploss(Cli),
    /// Energy-efficiency sweep
    Ee(Cli),
    /// Monte Carlo RMSE experiment
    Mc(Cli),
    /// Closed-form vs oracle Fisher-information validation
    Validate(Cli),
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (name, cli) = match &args.command {
        Command::Crlb(c) => ("crlb", c),
        Command::Ploss(c) => ("ploss", c),
        Command::Ee(c) => ("ee", c),
        Command::Mc(c) => ("mc", c),
        Command::Validate(c) => ("validate", c),
    };
    let cfg = match ResolvedConfig::resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match name {
        "crlb" => runs::run_crlb(&cfg),
        "ploss" => runs::run_ploss(&cfg),
        "ee" => runs::run_ee(&cfg),
        "mc" => runs::run_mc(&cfg),
        _ => runs::run_validate(&cfg),
    };
    match result {
        Ok(runs::Outcome::Success) => ExitCode::SUCCESS,
        Ok(runs::Outcome::ValidationFailure(msg)) => {
            eprintln!("validation failure: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
