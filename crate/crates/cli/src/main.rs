use std::process::ExitCode;

use clap::Parser;
use taunets_cli::{configure_threads, run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads(std::env::var("TAUNETS_THREADS").ok().as_deref()) {
        eprintln!("taunets: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let outcome = run(&cli);
    if let Some(msg) = &outcome.error {
        eprintln!("taunets: {msg}");
    }
    ExitCode::from(outcome.code)
}
