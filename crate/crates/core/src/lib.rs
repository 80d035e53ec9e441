//! Controlled query-distribution shifts for passage retrieval.
//!
//! The crate builds topic, WH-intent and length shifts over a query set,
//! mines BM25 training triplets for each leave-one-out training pool,
//! evaluates externally produced runs into in-domain versus zero-shot
//! summaries, and relates the losses to two train/test similarity
//! indicators (weighted Jaccard over query terms, and mean embedding dot
//! product).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision used by the command-line tool.

pub mod bm25;
pub mod corpus;
pub mod harness;
pub mod indicators;
pub mod metrics;
pub mod scalar;
pub mod seed;
pub mod serde_float;
pub mod shift;

pub use scalar::Scalar;

pub type KMeansModel64 = shift::KMeansModel<f64>;
pub type KMeansModel32 = shift::KMeansModel<f32>;
pub type TTestResult64 = metrics::TTestResult<f64>;
pub type TermDistribution64 = indicators::TermDistribution<f64>;
