use thiserror::Error;

pub type Result<T> = std::result::Result<T, AceError>;

#[derive(Debug, Error)]
pub enum AceError {
    /// Malformed PGM input.
    #[error("pgm parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Malformed model file.
    #[error("model format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    /// A caller-supplied argument is out of range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Inputs are individually valid but do not fit together
    /// (bit depth or dimension mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The object is not in a state that supports the query.
    #[error("invalid state: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AceError {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        AceError::Parse {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        AceError::Format {
            offset,
            message: message.into(),
        }
    }
}
