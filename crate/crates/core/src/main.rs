use std::process::ExitCode;

use alr::cli::{execute, Cli};
use alr::Error;
use clap::Parser;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Schema(_) => 2,
        Error::Io { .. } | Error::EmptyFile { .. } | Error::Header { .. } | Error::Cell { .. } => 3,
        Error::MissingOutput(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
