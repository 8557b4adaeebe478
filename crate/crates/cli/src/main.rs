mod args;
mod commands;
mod operators;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit status for I/O, parse and parameter failures.
pub const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Pair(a) => commands::pair(a),
        Command::Srg(a) => commands::srg(a),
        Command::Certify(a) => commands::certify(a),
        Command::Calculus(a) => commands::calculus(a),
        Command::Bellman(a) => commands::bellman(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
