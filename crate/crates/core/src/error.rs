use thiserror::Error;

/// Errors raised by the library.
///
/// Everything except [`Error::Io`] and [`Error::Parse`] is a violated
/// precondition on the caller's inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    Dimension {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("unsupported exponent p = {0}; only p >= 1 (or infinity) is supported")]
    UnsupportedExponent(f64),

    #[error(
        "exact RIP enumeration needs {required} supports but the budget is {budget}; \
         use the Monte-Carlo lower bound instead"
    )]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("excluded case: {0}")]
    ExcludedCase(String),

    #[error("iteration budget {iterations} exceeds the number of columns {cols}")]
    IterationBudget { iterations: usize, cols: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// True for errors caused by malformed input files or the filesystem.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Io(err.into())
        } else {
            Error::Parse {
                location: format!("line {} column {}", err.line(), err.column()),
                message: err.to_string(),
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
