//! Leave-one-out evaluation: the metric matrix and its per-column summaries.

mod export;
mod matrix;
mod summary;

use thiserror::Error;

use crate::metrics::MetricError;

pub use export::{load_summary_json, summary_csv, summary_json, SummaryReport};
pub use matrix::{build_matrix, EvalMatrix, MissingQuery};
pub use summary::{column_aggregate, summarize, CellMean, ColumnAggregate, ShiftSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no run supplied for training set {0:?}")]
    MissingRun(String),
    #[error("query {0:?} has no positive judgments")]
    MissingQrels(String),
    #[error("matrix is not square: rows {rows:?} vs columns {cols:?}")]
    NonSquareMatrix {
        rows: Vec<String>,
        cols: Vec<String>,
    },
    #[error("average in-domain value is zero for {0:?}")]
    ZeroAvgIn(String),
    #[error("malformed matrix: {0}")]
    Shape(String),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
