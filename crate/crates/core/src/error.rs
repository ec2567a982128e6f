use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A delimited input row could not be parsed. Rows are 1-based and count
    /// the header as row 1.
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model specification error: {0}")]
    Specification(String),

    #[error("design matrix is rank deficient; dependent columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    /// A group-period cell needed by an estimator has no observations.
    #[error("not identified: empty cell {cell}")]
    EmptyCell { cell: String },

    #[error("not identified: {0}")]
    NotIdentified(String),

    #[error("value outside its domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("missing input {}", path.display())]
    MissingInput { path: PathBuf },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
