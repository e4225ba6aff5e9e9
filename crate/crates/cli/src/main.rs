use std::process::ExitCode;

use clap::Parser;
use cliqueweight_cli::args::Cli;
use cliqueweight_cli::commands::dispatch;

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
