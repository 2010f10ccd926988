//! `phinet` command line tool.
//!
//! Exit codes: 0 success, 1 usage, 2 input could not be read or parsed,
//! 3 model error, 4 numeric failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use phinet::ErrorKind;

use args::{Cli, Command};

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Io | ErrorKind::Parse => 2,
        ErrorKind::Model => 3,
        ErrorKind::Numeric => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let result = match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Marginals(a) => commands::marginals(a),
        Command::Fit(a) => commands::fit_cmd(a),
        Command::Infer(a) => commands::infer(a),
        Command::Evaluate(a) => commands::evaluate_cmd(a),
        Command::Compare(a) => commands::compare_cmd(a),
        Command::Homophily(a) => commands::homophily_cmd(a),
        Command::Triads(a) => commands::triads_cmd(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phinet {}: {e}", cli.command.name());
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
