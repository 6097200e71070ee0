//! Command-line front end: a JSON run configuration with flag overrides,
//! dispatched to the library, with CSV and JSON emitters.
//!
//! Exit codes: 0 success, 1 usage, 2 numeric or I/O failure, 3 invariant
//! violation.

mod commands;
mod config;
mod output;

use std::ffi::OsString;

use clap::Parser;
use thiserror::Error;

pub use commands::run;
pub use config::{
    ChainConfig, Cli, CommandArgs, CommandKind, Ep3Config, Flags, Format, GridConfig, OutputConfig, RunConfig, DEFAULT_GAMMAS,
    TOLERANCES,
};
pub use output::{emit_figure_data, fmt_f, load_records, sibling_json, EpFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_FAILURE,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl From<crate::epscan::EpScanError> for CliError {
    fn from(e: crate::epscan::EpScanError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            other => CliError::Numeric(format!("csv: {other:?}")),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.into())
        } else {
            CliError::Numeric(format!("json: {e}"))
        }
    }
}

/// Resolves the configuration for one invocation: file, then flags.
pub fn resolve(args: CommandArgs) -> Result<RunConfig, CliError> {
    let (invoked, flags) = args.split();
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    match (invoked, cfg.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("command: config names {b:?} but {a:?} was invoked")));
        }
        (Some(a), _) => cfg.command = Some(a),
        (None, None) => return Err(CliError::Usage("command: `run` needs a config that names a command".into())),
        (None, Some(_)) => {}
    }
    flags.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `cfg` on a pool of `cfg.threads` workers, or on the global pool.
pub fn run_with_threads(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?
            .install(|| run(cfg)),
        None => run(cfg),
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli.command).and_then(|cfg| run_with_threads(&cfg)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("psh-spectra: {e}");
            e.exit_code()
        }
    }
}
