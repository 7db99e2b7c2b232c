use std::process::ExitCode;

use clap::Parser;
use mimome_cli::app::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mimome: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
