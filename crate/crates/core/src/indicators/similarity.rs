use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::IndicatorError;
use crate::corpus::EmbeddingSet;
use crate::scalar::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub query_id: String,
    pub value: f64,
}

/// Mean dot product against a fixed training set, answered in `O(dim)` per
/// query from the precomputed sum of the training rows.
///
/// Products of two `f32` values are exact in `f64`, so summing the training
/// rows first only reorders exact terms before the final rounding.
#[derive(Debug, Clone)]
pub struct SimilarityIndex {
    sum: Vec<f64>,
    train_count: usize,
}

impl SimilarityIndex {
    pub fn new<S: AsRef<str>>(emb: &EmbeddingSet, train_ids: &[S]) -> Result<Self, IndicatorError> {
        if train_ids.is_empty() {
            return Err(IndicatorError::EmptyTrainSet);
        }
        let rows: Vec<&[f32]> = train_ids
            .iter()
            .map(|id| {
                emb.row_by_id(id.as_ref())
                    .ok_or_else(|| IndicatorError::UnknownId(id.as_ref().to_owned()))
            })
            .collect::<Result<_, _>>()?;
        let sum = (0..emb.dim())
            .into_par_iter()
            .map(|d| {
                let s: CompensatedSum<f64> = rows.iter().map(|r| f64::from(r[d])).collect();
                s.value()
            })
            .collect();
        Ok(SimilarityIndex {
            sum,
            train_count: rows.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn train_count(&self) -> usize {
        self.train_count
    }

    /// R for an arbitrary query vector.
    pub fn score_vector(&self, q: &[f64]) -> Result<f64, IndicatorError> {
        if q.len() != self.sum.len() {
            return Err(IndicatorError::DimensionMismatch {
                expected: self.sum.len(),
                found: q.len(),
            });
        }
        let dot: CompensatedSum<f64> = q.iter().zip(&self.sum).map(|(a, b)| a * b).collect();
        Ok(dot.value() / self.train_count as f64)
    }

    pub fn score(
        &self,
        emb: &EmbeddingSet,
        query_id: &str,
    ) -> Result<SimilarityScore, IndicatorError> {
        let row = emb
            .row_by_id(query_id)
            .ok_or_else(|| IndicatorError::UnknownId(query_id.to_owned()))?;
        let q: Vec<f64> = row.iter().map(|&x| f64::from(x)).collect();
        Ok(SimilarityScore {
            query_id: query_id.to_owned(),
            value: self.score_vector(&q)?,
        })
    }

    /// Scores in the order of `query_ids`.
    pub fn score_all<S: AsRef<str> + Sync>(
        &self,
        emb: &EmbeddingSet,
        query_ids: &[S],
    ) -> Result<Vec<SimilarityScore>, IndicatorError> {
        query_ids
            .par_iter()
            .map(|q| self.score(emb, q.as_ref()))
            .collect()
    }
}

/// Mean dot product between the query's embedding and every training
/// embedding, accumulated in 64 bits.
pub fn model_similarity<S: AsRef<str>>(
    query_id: &str,
    train_ids: &[S],
    emb: &EmbeddingSet,
) -> Result<SimilarityScore, IndicatorError> {
    SimilarityIndex::new(emb, train_ids)?.score(emb, query_id)
}

/// Header `query_id R`, tab separated, in the given order.
pub fn r_scores_tsv(scores: &[SimilarityScore]) -> String {
    let mut out = String::from("query_id\tR\n");
    for s in scores {
        out.push_str(&format!("{}\t{}\n", s.query_id, s.value));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb() -> EmbeddingSet {
        EmbeddingSet::new(
            2,
            vec!["q".into(), "t1".into(), "t2".into()],
            vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn hand_values() {
        let e = emb();
        assert_eq!(model_similarity("q", &["t1", "t2"], &e).unwrap().value, 0.5);
        let v = EmbeddingSet::new(3, vec!["a".into()], vec![1.5, -2.0, 0.25]).unwrap();
        assert_eq!(
            model_similarity("a", &["a"], &v).unwrap().value,
            2.25 + 4.0 + 0.0625
        );
    }

    #[test]
    fn errors() {
        let e = emb();
        assert!(matches!(
            model_similarity("q", &["t1", "nope"], &e),
            Err(IndicatorError::UnknownId(id)) if id == "nope"
        ));
        assert!(matches!(
            model_similarity("nope", &["t1"], &e),
            Err(IndicatorError::UnknownId(_))
        ));
        assert!(matches!(
            model_similarity::<&str>("q", &[], &e),
            Err(IndicatorError::EmptyTrainSet)
        ));
        let idx = SimilarityIndex::new(&e, &["t1"]).unwrap();
        assert!(matches!(
            idx.score_vector(&[1.0]),
            Err(IndicatorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tsv_layout() {
        let s = [SimilarityScore {
            query_id: "q1".into(),
            value: 0.5,
        }];
        assert_eq!(r_scores_tsv(&s), "query_id\tR\nq1\t0.5\n");
    }
}
