use std::path::PathBuf;

use fkgrad::{ChainError, FkError, IdentifyError, UrdfError};
use fkgrad_bench::BenchError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Urdf { path: PathBuf, source: UrdfError },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("{0}")]
    EmptyChain(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Fk(#[from] FkError),
    #[error("identification failed: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Write(_) => 1,
            CliError::Urdf { .. } | CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Chain(_) | CliError::EmptyChain(_) => 3,
            CliError::Shape(_) | CliError::Fk(_) => 4,
            CliError::Numerical(_) => 6,
        }
    }
}

impl From<IdentifyError> for CliError {
    fn from(e: IdentifyError) -> Self {
        match e {
            IdentifyError::Chain(c) => CliError::Chain(c),
            IdentifyError::TargetNotInChain(_) => CliError::Usage(e.to_string()),
            IdentifyError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            IdentifyError::Fk(f) => CliError::Fk(f),
            IdentifyError::TargetCount { .. } => CliError::Shape(e.to_string()),
            IdentifyError::NonFiniteLoss { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Chain(c) => CliError::Chain(c),
            BenchError::Fk(f) => CliError::Fk(f),
            BenchError::NoDof { .. } => CliError::EmptyChain(e.to_string()),
            BenchError::ZeroBatch | BenchError::NoBatchSizes => CliError::Usage(e.to_string()),
        }
    }
}
