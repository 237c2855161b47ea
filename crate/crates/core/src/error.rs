use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input or configuration outside the documented domain.
    #[error("validation error: {0}")]
    Validation(String),

    /// A malformed record in an input file. `line` is 1-based and counts the header.
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },

    /// The price-positivity guard fired during path simulation.
    #[error("non-positive trade price {price} at step {step}")]
    NonPositivePrice { step: usize, price: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the `qcw` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } => 2,
            Error::NonPositivePrice { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}
