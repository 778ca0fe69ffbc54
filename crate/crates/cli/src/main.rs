//! `halfspec` command-line tool.
//!
//! Units: distances in km for geographic data (otherwise the units of the
//! supplied coordinates), time in sampling steps (days for daily data),
//! frequencies in radians per time unit.

mod config;
mod run;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("{}", json!({"error": {"kind": "config", "message": e.to_string()}}));
            return ExitCode::from(2);
        }
    }
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = match e.kind() {
                halfspec::error::ErrorKind::Config => ("config", 2),
                halfspec::error::ErrorKind::Io => ("io", 3),
                halfspec::error::ErrorKind::Numeric => ("numeric", 4),
            };
            eprintln!("{}", json!({"error": {"kind": kind, "message": e.to_string()}}));
            ExitCode::from(code)
        }
    }
}
