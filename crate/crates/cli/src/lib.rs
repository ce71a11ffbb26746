//! Batch front-end: JSON-configured runs of the checkers, a catalog of
//! built-in symbols, JSON reports with CSV plot data, and the spectrum cache.

use std::path::PathBuf;

pub mod builtins;
pub mod config;
mod run;

pub use config::{CheckSpec, RunConfig};
pub use run::{
    cache_dir, config_hash, load_config, parse_config, run, write_outputs, CheckOutcome, Context, ErrorObject, RunReport,
    Status, VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Json(String),
    #[error("config: {0}")]
    Config(String),
    #[error("check: {0}")]
    Check(String),
}
