//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by training, optimization, embedding and pipeline code.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed caller input (dimension mismatches, bad bounds, empty data).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The SMO solver did not reach the KKT tolerance within its budget.
    #[error("training did not converge after {iterations} pair updates (tolerance {tolerance})")]
    NoConvergence { iterations: usize, tolerance: f64 },

    /// An objective function returned a non-finite value.
    #[error("objective returned non-finite value at {position:?}")]
    NonFiniteObjective { position: Vec<f64> },

    /// Delay/dimension estimation cannot proceed (e.g. constant series).
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// Min-max scaling is undefined for the given data.
    #[error("scaling failed: {0}")]
    Scaling(String),

    /// A loss differential of zero everywhere: the compared forecasts are
    /// indistinguishable and the DM statistic is undefined.
    #[error("degenerate comparison: {0}")]
    DegenerateComparison(String),

    /// CSV ingestion problems, with a line number where one applies.
    #[error("quote data error: {0}")]
    QuoteData(String),

    /// Report persistence or re-validation failures.
    #[error("report error: {0}")]
    Report(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
