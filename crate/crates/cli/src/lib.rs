//! Config-driven command line for the fluency modeling toolkit.
//!
//! `clean`, `evaluate`, `adapt` and `report` read one TOML config and write
//! deterministic artifacts under its output directory.

pub mod artifacts;
pub mod cache;
pub mod commands;
pub mod config;
mod csvout;
pub mod pipeline;
pub mod resources;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use fluency_core::{Error, ErrorClass, Result};

pub use config::{BackendKind, LoadedConfig, RunConfig};
pub use pipeline::RunContext;

#[derive(Debug, Parser)]
#[command(name = "fluency", version, about = "Semantic fluency modeling pipeline")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Masked-LM backend, overriding `backend.kind`.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Reuse cached outcomes from an earlier run.
    #[arg(long, global = true)]
    pub resume: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Correct, lemmatize and deduplicate the raw dataset.
    Clean,
    /// Score every function on every list and aggregate.
    Evaluate,
    /// Sweep adaptive selection over window sizes.
    Adapt,
    /// Render a markdown summary and plot-ready CSVs.
    Report,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_BACKEND: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Config => EXIT_CONFIG,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Backend => EXIT_BACKEND,
    }
}

/// Runs one subcommand to completion.
pub fn run(cli: &Cli) -> Result<()> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    if cli.jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let loaded = LoadedConfig::load(config_path)?;
    let ctx = RunContext::new(loaded, cli.output.clone(), cli.backend, cli.resume);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Clean => commands::clean::run(&ctx),
        Command::Evaluate => commands::evaluate::run(&ctx),
        Command::Adapt => commands::adapt::run(&ctx),
        Command::Report => commands::report::run(&ctx),
    })
}

/// Parses `args`, runs, reports any error on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
