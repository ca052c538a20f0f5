use std::process::ExitCode;

use clap::Parser;
use ncprob_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ncprob_cli::run(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
