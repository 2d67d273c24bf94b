use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated; the message names it.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A dataset column has zero variance, so correlations and standardized
    /// values are undefined for it. `column` is the zero-based index.
    #[error("degenerate variable: column {column} has zero variance")]
    DegenerateVariable { column: usize },

    /// The input as a whole carries no usable structure (for example all
    /// subjects identical in RV space, or zero within-group variance).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A config file could not be parsed or fails validation.
    #[error("config error: {0}")]
    Config(String),

    /// A data file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
