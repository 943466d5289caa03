mod batch;
mod cli;
mod commands;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};
use error::{CliError, Result};

/// Exit status 0 on success, 1 when a certificate or construction was
/// rejected, 2 on any error.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            output::emit_error(&CliError::usage(e.to_string()), None);
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            output::emit_error(&e, cli.out.as_deref());
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Command::Batch(args) = &cli.command {
        return batch::run(cli, args);
    }
    let art = commands::run(cli)?;
    output::emit(cli, &art)?;
    Ok(art.passed)
}
