use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ragged rows: row {row} has length {got}, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent dataset: rows {first} and {second} have identical inputs but different targets")]
    InconsistentData { first: usize, second: usize },

    /// A feature-set instance contains a pair of examples with identical
    /// inputs but differing target values, so no feature subset can
    /// distinguish them.
    #[error("infeasible feature-set instance{}: examples {first} and {second} are contradictory", target.map(|t| format!(" for target {t}")).unwrap_or_default())]
    Infeasible {
        target: Option<usize>,
        first: usize,
        second: usize,
    },

    #[error("empty problem: {0}")]
    EmptyProblem(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
