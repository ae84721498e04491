use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("user {user_id} has {len} action(s); at least 2 are required")]
    InsufficientHistory { user_id: u32, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch} (mean loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("parameter file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad input data or arguments, as opposed to runtime
    /// failures such as I/O or divergence.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::InsufficientHistory { .. }
                | Error::Empty(_)
                | Error::OutOfRange(_)
                | Error::Shape(_)
        )
    }
}
