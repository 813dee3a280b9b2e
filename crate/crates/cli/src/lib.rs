//! Command-line harness: scenario generation, single evaluations, pipeline
//! runs and parameter sweeps with Monte-Carlo replicates.
//!
//! Exit codes: 0 success, 1 `--verify-row` mismatch, 2 usage error,
//! 3 infeasible problem, 4 solver failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

use clap::Parser;

use args::{Cli, Command};
pub use error::{CliError, CliResult};

/// Parses `argv` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Eval(a) => commands::eval(a),
        Command::Select(a) => commands::select(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("nodesel: {e}");
            e.exit_code()
        }
    }
}
