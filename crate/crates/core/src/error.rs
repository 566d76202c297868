use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("offset {offset} is outside the window (|m|_inf must be <= {max})")]
    IndexOutOfRange { offset: String, max: usize },

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("dimension {0} is not supported (expected 1 or 2)")]
    UnsupportedDim(usize),

    #[error("norm `{0}` is not solid")]
    NonSolidBase(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("finite section is numerically singular (condition estimate {condition:.3e})")]
    SingularSection { condition: f64 },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("insufficient diagonals for a decay fit: {found} in window, need at least {needed}")]
    InsufficientDiagonals { found: usize, needed: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
