//! `dyson-dd`: evolve states, sweep infidelities, tabulate transition
//! amplitudes and validate the divided-difference engine.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or configuration
//! error, 3 capacity exceeded.

mod args;
mod commands;
mod error;
mod table;
mod validate;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

/// Environment variable capping the number of worker threads.
const THREADS_VAR: &str = "DYSON_DD_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR}='{value}' must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Evolve(args) => commands::evolve(&args)?.emit(args.output.format, args.output.out.as_deref()),
        Command::InfidelitySweep(args) => {
            commands::infidelity_sweep(&args)?.emit(args.output.format, args.output.out.as_deref())
        }
        Command::Amplitude(args) => commands::amplitude(&args)?.emit(args.output.format, args.output.out.as_deref()),
        Command::Validate(args) => {
            let (report, passed) = validate::run(&args)?;
            report.emit(args.output.format, args.output.out.as_deref())?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Validation("at least one suite exceeded its tolerance".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
