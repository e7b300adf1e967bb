use std::process::ExitCode;

use chaoscrypt_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chaoscrypt: {e}");
            ExitCode::FAILURE
        }
    }
}
