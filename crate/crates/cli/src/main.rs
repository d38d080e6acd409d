mod cli;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};
use error::CliError;

fn threads(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Simulate(a) => a.common.threads,
        Command::Estimate(a) => a.common.threads,
        Command::Predict(a) => a.common.threads,
        Command::SvSynth(a) => a.common.threads,
        Command::SvFit(a) => a.common.threads,
        Command::SvForecast(a) => a.common.threads,
        Command::Study(a) => a.common.threads,
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    if let Some(n) = threads(&cmd) {
        if n == 0 {
            return Err(CliError::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    match cmd {
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Estimate(a) => commands::estimate::run(a),
        Command::Predict(a) => commands::predict::run(a),
        Command::SvSynth(a) => commands::sv::synth(a),
        Command::SvFit(a) => commands::sv::fit(a),
        Command::SvForecast(a) => commands::sv::forecast(a),
        Command::Study(a) => commands::study::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
