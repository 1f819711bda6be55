//! Command-line experiment runner for non-convex Follow-the-Perturbed-Leader.
//!
//! Every command writes a CSV file with a fixed header and a plain-text
//! summary next to it, and prints the summary to stdout. Exit codes: `0`
//! success, `2` configuration error, `3` oracle budget exceeded, `1` when an
//! output file cannot be written.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fmt;

use nonconvex_ftpl::Error;

pub use commands::{execute, trial_seed, Outcome};
pub use config::{parse_config, Command, RunConfig};
pub use report::{CsvRow, Summary, CSV_HEADER, CSV_SCHEMA};

#[derive(Debug)]
pub enum CliError {
    /// Bad command line (unknown command, malformed flag, `--help`).
    Usage(clap::Error),
    /// Invalid or unreadable configuration.
    Config(String),
    /// The oracle grid would exceed its point budget.
    Budget(String),
    /// An output file could not be written.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "error: {m}"),
            CliError::Budget(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::GridBudget { .. } => CliError::Budget(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parses `argv`, runs the command and writes its outputs.
pub fn run_with_args<I, T>(argv: I) -> Result<Summary, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = parse_config(argv)?;
    let outcome = execute(&cfg)?;
    let io = |e: std::io::Error, what: &std::path::Path| CliError::Io(format!("cannot write {}: {e}", what.display()));
    report::write_csv(&cfg.output, &outcome.rows).map_err(|e| io(e, &cfg.output))?;
    let summary_path = cfg.summary_path();
    outcome.summary.write(&summary_path).map_err(|e| io(e, &summary_path))?;
    Ok(outcome.summary)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_with_args(argv) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            CliError::Usage(e).exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
