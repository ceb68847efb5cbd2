use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Rejected configuration, caught before any work is done.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The solver produced a non-finite iterate.
    #[error("solver diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("truncated payload at byte {offset}: expected {expected} more bytes")]
    Truncated { offset: usize, expected: usize },

    #[error("unsupported netpbm format {magic:?} at byte 0")]
    UnsupportedFormat { magic: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
