use thiserror::Error;

/// Errors raised by the model, estimation and IO layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("similarity matrix {index} ({label}): {reason}")]
    SimilarityShape {
        index: usize,
        label: String,
        reason: String,
    },

    #[error("invalid similarity matrix {label}: {reason}")]
    InvalidSimilarity { label: String, reason: String },

    #[error("p = {p} exceeds the exact enumeration cap of {cap}; use the Gibbs sampler instead")]
    EnumerationCap { p: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid attribute column {column}: row {row}: {reason}")]
    Attribute {
        column: String,
        row: usize,
        reason: String,
    },

    #[error("singular matrix in {context} (condition number estimate {condition:.3e})")]
    Singular { context: String, condition: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{file}: row {row}, column {column}: {reason}")]
    Parse {
        file: String,
        row: usize,
        column: String,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    /// True when the error stems from user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Singular { .. } | Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
