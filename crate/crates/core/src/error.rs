use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// The solver produced a non-finite iterate.
    #[error("solver diverged at iteration {iter}: {reason}")]
    Divergence { iter: usize, reason: String },

    /// SVD or other numeric failure inside a solve, tagged with the iteration.
    #[error("solver failed at iteration {iter}: {source}")]
    SolveFailed {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep cell {axis}={value} (repeat {repeat}) failed: {source}")]
    Cell {
        axis: String,
        value: f64,
        repeat: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidValue(msg.into())
    }

    pub(crate) fn format(offset: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }
}
