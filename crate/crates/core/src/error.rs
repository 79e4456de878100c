use thiserror::Error;

/// Errors emitted by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape of an argument does not match what the operation expects.
    #[error("shape mismatch: expected {expected}, got {got}{}", context_suffix(.context))]
    ShapeMismatch {
        expected: String,
        got: String,
        context: String,
    },

    /// An argument is out of the admissible range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration is inconsistent (bad config file, singular Gram matrix, ...).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The requested closed form or bound is not available for this combination.
    #[error("not supported: {0}")]
    NotSupported(String),

    /// An iterative routine did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// A file could not be parsed; position is line (1-based) where known.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

impl Error {
    pub(crate) fn shape_mismatch(
        expected: impl ToString,
        got: impl ToString,
        context: &str,
    ) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
            context: context.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
