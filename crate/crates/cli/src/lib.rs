//! Config parsing, command dispatch and CSV emission for the `myopic` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub use commands::{dispatch, Outcome};
pub use config::{parse_config, parse_config_with, CommandKind, ConfigError, ExperimentSpec, Overrides};
pub use output::{emit_csv, to_csv_string, Cell, Table};

/// Build identifier stamped on every row.
pub const BUILD_ID: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigError>),
    #[error(transparent)]
    Core(#[from] myopic_core::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Output(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Runs a parsed spec and returns its table with provenance columns.
pub fn execute(spec: &ExperimentSpec) -> Result<Outcome, CliError> {
    let out = dispatch(&spec.command, spec.seed)?;
    Ok(Outcome {
        table: out.table.with_provenance(spec.seed, BUILD_ID, &spec.config_hash),
        selftest_failed: out.selftest_failed,
    })
}

/// Parses, runs and renders a document to CSV text.
pub fn run_document(text: &str, overrides: &Overrides) -> Result<(String, bool), CliError> {
    let spec = parse_config_with(text, overrides).map_err(CliError::Config)?;
    let out = execute(&spec)?;
    Ok((to_csv_string(&out.table)?, out.selftest_failed))
}

/// Writes a table to `path`, or to stdout when `path` is `None`.
pub fn write_table(table: &Table, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let io = |source| CliError::Io { path: p.to_path_buf(), source };
            let file = File::create(p).map_err(io)?;
            let mut w = BufWriter::new(file);
            emit_csv(table, &mut w)?;
            w.flush().map_err(io)
        }
        None => emit_csv(table, std::io::stdout().lock()),
    }
}
