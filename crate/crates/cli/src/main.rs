//! `mediasent`: command-line pipeline from article dump to figures.

mod cli;
mod config;
mod jobs;
mod run;

use std::process::ExitCode;

use clap::Parser;
use mediasent_core::ErrorCategory;

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 3,
        ErrorCategory::Data => 4,
        ErrorCategory::Environment => 5,
    }
}

fn main() -> ExitCode {
    let args = cli::Cli::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match cli::execute(args) {
        Ok(run_dir) => {
            println!("{}", run_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category().as_str());
            ExitCode::from(exit_code(e.category()))
        }
    }
}
