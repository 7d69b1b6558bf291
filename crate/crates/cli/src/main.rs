mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kingman: {e}");
            match e {
                CliError::Failed(_) => ExitCode::from(1),
                CliError::Usage(_) | CliError::Io(_) => ExitCode::from(2),
            }
        }
    }
}
