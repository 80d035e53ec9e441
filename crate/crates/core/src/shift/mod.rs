//! Construction of the three query shifts (topic, WH-intent, length), their
//! train/test splits and the leave-one-out experiment plan.

mod expand;
mod kmeans;
mod length;
mod manifest;
mod plan;
mod spread;
mod wh;

use std::path::PathBuf;

use thiserror::Error;

pub use expand::{expand_clusters, expand_groups, Expansion, Group};
pub use kmeans::{embedding_matrix, kmeans, KMeansConfig, KMeansModel};
pub use length::{length_split, lower_median, LengthBoundary};
pub use manifest::{make_train_test, Cluster, ShiftManifest};
pub use plan::{experiment_name, leave_one_out_plan, EvalSet, Experiment, ExperimentPlan};
pub use spread::{pairwise_distances, select_spread_subset, SelectionMode};
pub use wh::{wh_assign, wh_split, WhClass, WhRules};

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("no input points or queries")]
    EmptyInput,
    #[error("k = {k} exceeds the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("m = {m} exceeds the number of centroids ({k})")]
    MTooLarge { m: usize, k: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("seed cluster {0} listed twice")]
    DuplicateSeed(usize),
    #[error("seed cluster {seed} out of range (k = {k})")]
    SeedOutOfRange { seed: usize, k: usize },
    #[error("cluster {cluster:?} has {size} queries, cannot hold out {test_size}")]
    TestSizeTooLarge {
        cluster: String,
        size: usize,
        test_size: usize,
    },
    #[error("leave-one-out needs at least 2 clusters with training queries, found {0}")]
    TooFewClusters(usize),
    #[error("keyword {0:?} appears in more than one WH list")]
    OverlappingKeywords(String),
    #[error("keyword {0:?} is not a single token")]
    InvalidKeyword(String),
    #[error("query {0:?} appears in more than one cluster or split")]
    OverlappingClusters(String),
    #[error("query {0:?} is not in the query set")]
    UnknownQuery(String),
    #[error("cluster name {0:?} is empty or repeated")]
    BadClusterName(String),
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
