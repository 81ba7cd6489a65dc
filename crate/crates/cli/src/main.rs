//! `rlm-duality`: data grids, dynamics traces and duality reports for the
//! resonant level model.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// A failure that should end the run with the given exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self { code: 2, error: e.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Dynamics(a) => commands::dynamics::run(a),
        Command::DivisibilityMap(a) => commands::divisibility::run(a),
        Command::FrequencyMap(a) => commands::frequency::run(a),
        Command::DualityCheck(a) => commands::duality::run(a),
        Command::Markov(a) => commands::markov::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
