//! Batch runner for giant-atom waveguide experiments: TOML configs in,
//! CSV tables and run manifests out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod scenario;
pub mod sweep;
pub mod validate;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("could not parse config: {0}")]
    Parse(String),

    #[error("invalid config at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] giant_sse::Error),

    #[error("sweep cell {index}: {source}")]
    Cell { index: usize, source: Box<CliError> },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
