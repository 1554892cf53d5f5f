//! Configuration-driven front end for the `selfsim` library.
//!
//! Every command reads a TOML [`config::RunConfig`], writes CSV tables and a
//! `manifest.json` into the output directory, and maps failures to exit
//! codes: 2 for configuration, 3 for solver and 4 for failed checks.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

pub use commands::{execute, Command};
pub use error::{CliError, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "selfsim", version, about = "Self-similar regularizations of the Riemann problem")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (defaults to `output` from the config, then `./out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for per-epsilon analysis.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value = "warn")]
    pub log_level: log::LevelFilter,
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<PathBuf, CliError> {
    let loaded = config::load(&cli.config)?;
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.max(1))
        .build()
        .map_err(|e| CliError::config(format!("cannot start {} workers: {e}", cli.workers)))?;
    pool.install(|| execute(cli.command, &loaded, &out))
}
