use std::io;

use crate::chain::ChainError;
use crate::instrument::InstrumentError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] coinopt_core::Error),

    #[error(transparent)]
    Instrument(#[from] InstrumentError),

    #[error(transparent)]
    Chain(#[from] ChainError),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Input { path: String, source: io::Error },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] io::Error),

    #[error("{0}")]
    Runtime(String),

    #[error("verification failed: {0} check(s) breached tolerance")]
    Verification(usize),
}

impl AppError {
    /// 2 for bad input, 3 for a failed verification, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Core(_)
            | AppError::Instrument(_)
            | AppError::Chain(_)
            | AppError::Usage(_)
            | AppError::Input { .. } => 2,
            AppError::Verification(_) => 3,
            AppError::Csv(_) | AppError::Io(_) | AppError::Runtime(_) => 1,
        }
    }
}
