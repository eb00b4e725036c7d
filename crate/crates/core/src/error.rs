use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum AmrError {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A cell record could not be accepted into a dataset.
    #[error("record {record}: {reason}")]
    Load { record: usize, reason: String },

    /// Malformed file contents that are not tied to one record.
    #[error("format error: {0}")]
    Format(String),

    #[error("dataset is empty")]
    EmptyDataset,

    /// The output would not fit the index types used by the mesh.
    #[error("output size overflow: {0}")]
    Overflow(String),

    /// An internal consistency check failed. Never caused by valid input.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl AmrError {
    pub(crate) fn load(record: usize, reason: impl Into<String>) -> Self {
        AmrError::Load {
            record,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = AmrError> = std::result::Result<T, E>;
