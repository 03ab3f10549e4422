use std::process::ExitCode;

use clap::Parser;
use dunkl_liyau_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dunkl_liyau_cli::run(&cli) {
        Ok(outcome) => {
            if outcome.failures > 0 {
                eprintln!("{} row(s) failed", outcome.failures);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
