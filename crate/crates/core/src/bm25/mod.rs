//! BM25 over an in-memory inverted index, and BM25 negative mining.

mod index;
mod mining;
mod persist;

use std::path::PathBuf;

use thiserror::Error;

pub use index::{bm25_score, build_index, search, Bm25Params, InvertedIndex, Posting};
pub use mining::{mine_negatives, MiningConfig, MiningReport, Triplet, TripletSet};
pub use persist::{INDEX_MAGIC, INDEX_VERSION};

#[derive(Debug, Error)]
pub enum Bm25Error {
    #[error("cannot index an empty collection")]
    EmptyCollection,
    #[error("query {0:?} has no positive judgment")]
    NoPositives(String),
    #[error("query {0:?} is not in the query set")]
    UnknownQuery(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("corrupt index file: {0}")]
    CorruptIndex(String),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
