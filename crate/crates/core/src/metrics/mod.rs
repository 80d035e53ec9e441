//! Per-query ranking metrics and the paired t-test.

mod ranking;
mod special;
mod ttest;

use thiserror::Error;

pub use ranking::{asl, mrr_at_k, recall_at_k, Metric, MRR_CUTOFF};
pub use special::{ln_beta, ln_gamma, regularized_incomplete_beta};
pub use ttest::{paired_t_test, student_t_two_sided_p, TTestResult};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("no positive documents")]
    NoPositives,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 paired samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("incomplete beta did not converge")]
    NoConvergence,
}

/// Reciprocal rank with the standard cutoff of 10.
pub fn mrr_at_10<S: AsRef<str>>(
    ranking: &[S],
    positives: &std::collections::BTreeSet<&str>,
) -> f64 {
    mrr_at_k(ranking, positives, MRR_CUTOFF)
}
