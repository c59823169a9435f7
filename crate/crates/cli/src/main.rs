//! `elliott`: batch experiments over random inductive limits and spectral
//! distances, with deterministic JSON-lines or CSV reports.
//!
//! Exit status: 0 on success, 2 on invalid configuration or unreadable
//! input, 3 when a report contains non-converged numerical results.

mod commands;
mod config;
mod report;
mod summary;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use config::{Cli, Command};

const EXIT_INVALID: u8 = 2;
const EXIT_NON_CONVERGED: u8 = 3;

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(EXIT_INVALID)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return fail("usage", e.to_string().trim()),
    };
    if let Command::Summary { path } = &cli.command {
        return match summary::summarize(path) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail("input", &e),
        };
    }
    let config = match config::resolve(&cli.command) {
        Ok(Some(c)) => c,
        Ok(None) => unreachable!("summary handled above"),
        Err(e) => return fail("validation", &e),
    };
    let body = match commands::run(&config) {
        Ok(b) => b,
        Err(e) => return fail("validation", &e),
    };
    let text = report::render(&config, &body.lines);
    let written = match &config.output {
        Some(path) => report::write_atomic(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("{}", json!({ "error": "io", "message": e.to_string() }));
        return ExitCode::FAILURE;
    }
    if body.non_converged {
        ExitCode::from(EXIT_NON_CONVERGED)
    } else {
        ExitCode::SUCCESS
    }
}
