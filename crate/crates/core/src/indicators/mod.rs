//! Train/test similarity indicators and their relation to zero-shot loss.

mod bins;
mod loss;
mod similarity;
mod stats;
mod terms;

use thiserror::Error;

use crate::harness::HarnessError;

pub use bins::{bin_by_similarity, bins_csv, BinReport, BinStats, Binning, FiveNumber};
pub use loss::{jaccard_loss_csv, jaccard_loss_table, JaccardLossRow, JaccardMode};
pub use similarity::{model_similarity, r_scores_tsv, SimilarityIndex, SimilarityScore};
pub use stats::{quantile_type7, spearman};
pub use terms::{term_distribution, weighted_jaccard, TermDistribution};

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("queries contain no tokens")]
    EmptyVocabulary,
    #[error("invalid term distribution: {0}")]
    InvalidDistribution(String),
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("empty training set")]
    EmptyTrainSet,
    #[error("vector has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("summaries {found:?} do not match manifest clusters {expected:?}")]
    ClusterMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("invalid bins: {0}")]
    InvalidBins(String),
    #[error("scored query {0:?} is not in any zero-shot column")]
    UnscoredQuery(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}
