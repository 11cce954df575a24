//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by pool construction, scoring, metrics, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two point sets or vectors disagree on dimensionality.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Not enough rows to fit a model.
    #[error("insufficient data: need at least {need} rows, got {got}")]
    InsufficientData { need: usize, got: usize },

    /// A metric scope has no variance (or too few rows) on some axis.
    #[error("degenerate scope on axis {axis}: {reason}")]
    DegenerateScope { axis: usize, reason: String },

    /// An exact computation was asked for more points than it can handle.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// No unlabeled candidates remain to acquire.
    #[error("candidate pool exhausted")]
    ExhaustedPool,

    /// A table is missing a required column or has an unusable layout.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell could not be parsed as a number.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// A parsed table yielded no usable rows.
    #[error("empty pool: {0}")]
    EmptyPool(String),

    /// A configuration file failed validation.
    #[error("config error: field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A failure inside one simulated run, annotated with where it happened.
    #[error("run {run_seed} iteration {iteration}: {source}")]
    Run {
        run_seed: u64,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that indicate misuse of the CLI or a bad config,
    /// as opposed to a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::Schema(_)
                | Error::Config { .. }
        )
    }
}
