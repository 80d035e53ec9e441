//! Input artifacts: queries, passages, qrels, TREC runs and query embeddings.
//!
//! All loaders are strict: a malformed line is an error, never skipped.

mod embeddings;
mod store;
mod tokenize;
mod trec;

use std::path::PathBuf;

use thiserror::Error;

pub use embeddings::{load_embeddings, EmbeddingSet, EMBEDDING_MAGIC, EMBEDDING_VERSION};
pub use store::{load_collection, load_queries, Collection, QuerySet, TextStore};
pub use tokenize::{tokenize, TokenList};
pub use trec::{load_qrels, load_run, QrelSet, RankedDoc, RunSet};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("duplicate qrel for query {query:?}, doc {doc:?}")]
    DuplicatePair { query: String, doc: String },
    #[error("line {line}: negative relevance")]
    NegativeRelevance { line: usize },
    #[error("document {doc:?} listed twice for query {query:?}")]
    DuplicateDocForQuery { query: String, doc: String },
    #[error("ranks for query {query:?} are not 1..n")]
    NonContiguousRanks { query: String },
    #[error("scores for query {query:?} increase at rank {rank}")]
    UnorderedScores { query: String, rank: usize },
    #[error("bad embedding file magic")]
    BadMagic,
    #[error("unsupported embedding file version {0}")]
    UnsupportedVersion(u32),
    #[error("embedding payload is {actual} bytes, expected {expected}")]
    SizeMismatch { expected: u64, actual: u64 },
    #[error("ids file has {actual} ids, header declares {expected}")]
    IdCountMismatch { expected: u64, actual: u64 },
    #[error("embedding dimension must be positive")]
    ZeroDimension,
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(line: usize, reason: impl Into<String>) -> Self {
        Self::MalformedLine {
            line,
            reason: reason.into(),
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))
}

/// Iterates `(1-based line number, line)` over non-empty lines, tolerating a
/// trailing newline.
pub(crate) fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}
