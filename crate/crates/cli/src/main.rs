use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use myopic_cli::{execute, parse_config_with, write_table, CliError, Overrides};

/// Runs one experiment described by a TOML document and writes CSV.
#[derive(Parser, Debug)]
#[command(name = "myopic", version)]
struct Args {
    /// Experiment document (TOML).
    config: PathBuf,
    /// Overrides the document's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the document's `output`; `-` writes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let stdout = args.out.as_deref() == Some(std::path::Path::new("-"));
    let overrides = Overrides { seed: args.seed, output: if stdout { None } else { args.out.clone() } };
    let spec = parse_config_with(&text, &overrides).map_err(CliError::Config)?;
    let out = execute(&spec)?;
    let path = if stdout { None } else { spec.output.as_deref() };
    write_table(&out.table, path)?;
    if out.selftest_failed {
        eprintln!("self-test FAILED");
    }
    Ok(!out.selftest_failed)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            // usage errors share the validation exit code
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
