//! Training triplets with negatives sampled from a BM25 candidate pool.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{search, Bm25Error, Bm25Params, InvertedIndex};
use crate::corpus::{QrelSet, QuerySet};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub n_neg: usize,
    /// Depth of the BM25 ranking negatives are drawn from.
    pub pool: usize,
    pub seed: u64,
    /// Minimum qrel relevance of a positive.
    pub rel_threshold: u32,
    pub bm25: Bm25Params,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            n_neg: 100,
            pool: 1000,
            seed: 0,
            rel_threshold: 1,
            bm25: Bm25Params::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub query_id: String,
    pub positive: String,
    pub negative: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripletSet(pub Vec<Triplet>);

impl TripletSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Triplet> {
        self.0.iter()
    }

    /// `query_id<TAB>pos_doc_id<TAB>neg_doc_id` per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.0 {
            let _ = writeln!(out, "{}\t{}\t{}", t.query_id, t.positive, t.negative);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, Bm25Error> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 || f.iter().any(|s| s.is_empty()) {
                return Err(Bm25Error::MalformedLine {
                    line: i + 1,
                    reason: "expected 3 non-empty tab-separated fields".into(),
                });
            }
            out.push(Triplet {
                query_id: f[0].to_owned(),
                positive: f[1].to_owned(),
                negative: f[2].to_owned(),
            });
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MiningReport {
    pub triplets: TripletSet,
    /// Queries whose pool held no non-positive document.
    pub skipped: Vec<String>,
}

/// Mines triplets for `ids` (or every query when `None`), in query-file order.
///
/// For each query the top `pool` BM25 hits minus its positives form the
/// candidate list; `min(n_neg, candidates)` of them are drawn uniformly
/// without replacement using a generator seeded from `(seed, query id)`, and
/// every positive is paired with every drawn negative.
pub fn mine_negatives(
    index: &InvertedIndex,
    queries: &QuerySet,
    ids: Option<&[String]>,
    qrels: &QrelSet,
    config: &MiningConfig,
) -> Result<MiningReport, Bm25Error> {
    config.bm25.validate()?;
    if config.pool == 0 {
        return Err(Bm25Error::InvalidParameter(
            "pool must be at least 1".into(),
        ));
    }
    let selected: Vec<(&str, &str)> = match ids {
        None => queries.iter().collect(),
        Some(ids) => {
            let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
            if let Some(missing) = wanted.iter().find(|id| !queries.contains(id)) {
                return Err(Bm25Error::UnknownQuery((*missing).to_owned()));
            }
            queries
                .iter()
                .filter(|(id, _)| wanted.contains(id))
                .collect()
        }
    };
    for (id, _) in &selected {
        if qrels.positives(id, config.rel_threshold).is_empty() {
            return Err(Bm25Error::NoPositives((*id).to_owned()));
        }
    }

    let per_query: Vec<(Vec<Triplet>, Option<String>)> = selected
        .par_iter()
        .map(|&(id, text)| {
            let positives = qrels.positives(id, config.rel_threshold);
            let candidates: Vec<String> = search(index, &config.bm25, text, config.pool)
                .into_iter()
                .map(|(doc, _)| doc)
                .filter(|doc| !positives.contains(doc.as_str()))
                .collect();
            if candidates.is_empty() {
                return (Vec::new(), Some(id.to_owned()));
            }
            let mut rng = seed::rng(seed::derive_seed(config.seed, id));
            let amount = config.n_neg.min(candidates.len());
            let mut picked =
                rand::seq::index::sample(&mut rng, candidates.len(), amount).into_vec();
            picked.sort_unstable();
            let triplets = positives
                .iter()
                .flat_map(|pos| {
                    picked.iter().map(|&n| Triplet {
                        query_id: id.to_owned(),
                        positive: (*pos).to_owned(),
                        negative: candidates[n].clone(),
                    })
                })
                .collect();
            (triplets, None)
        })
        .collect();

    let mut report = MiningReport::default();
    for (triplets, skipped) in per_query {
        report.triplets.0.extend(triplets);
        if let Some(id) = skipped {
            log::warn!("query {id}: no negative candidates in the BM25 pool, skipped");
            report.skipped.push(id);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm25::build_index;
    use crate::corpus::Collection;

    fn fixture(n_docs: usize) -> (InvertedIndex, QuerySet, QrelSet) {
        let docs = (0..n_docs).map(|i| (format!("d{i}"), format!("apple banana w{i}")));
        let index = build_index(&Collection::from_entries(docs).unwrap()).unwrap();
        let queries = QuerySet::parse("q1\tapple\nq2\tbanana w3\n").unwrap();
        let qrels = QrelSet::parse("q1 0 d0 1\nq2 0 d3 1\nq2 0 d4 2\n").unwrap();
        (index, queries, qrels)
    }

    #[test]
    fn one_positive_hundred_negatives() {
        let (index, queries, qrels) = fixture(300);
        let report = mine_negatives(
            &index,
            &queries,
            Some(&["q1".into()]),
            &qrels,
            &MiningConfig::default(),
        )
        .unwrap();
        assert_eq!(report.triplets.len(), 100);
        assert!(report
            .triplets
            .iter()
            .all(|t| t.positive == "d0" && t.negative != "d0"));
        let distinct: HashSet<_> = report.triplets.iter().collect();
        assert_eq!(distinct.len(), 100);
    }

    #[test]
    fn every_positive_paired_with_every_negative() {
        let (index, queries, qrels) = fixture(20);
        let config = MiningConfig {
            n_neg: 5,
            ..MiningConfig::default()
        };
        let report =
            mine_negatives(&index, &queries, Some(&["q2".into()]), &qrels, &config).unwrap();
        assert_eq!(report.triplets.len(), 10);
    }

    #[test]
    fn pool_of_positives_only_is_skipped() {
        let index = build_index(&Collection::parse("d1\tapple\nd2\tpear\n").unwrap()).unwrap();
        let queries = QuerySet::parse("q\tapple\n").unwrap();
        let qrels = QrelSet::parse("q 0 d1 1\n").unwrap();
        let report =
            mine_negatives(&index, &queries, None, &qrels, &MiningConfig::default()).unwrap();
        assert!(report.triplets.is_empty());
        assert_eq!(report.skipped, ["q"]);
    }

    #[test]
    fn deterministic_per_seed() {
        let (index, queries, qrels) = fixture(500);
        let config = MiningConfig {
            n_neg: 10,
            seed: 7,
            ..MiningConfig::default()
        };
        let a = mine_negatives(&index, &queries, None, &qrels, &config).unwrap();
        let b = mine_negatives(&index, &queries, None, &qrels, &config).unwrap();
        assert_eq!(a, b);
        let c = mine_negatives(
            &index,
            &queries,
            None,
            &qrels,
            &MiningConfig { seed: 8, ..config },
        )
        .unwrap();
        assert_ne!(a.triplets, c.triplets);
    }

    #[test]
    fn missing_positive_is_an_error() {
        let (index, _, qrels) = fixture(5);
        let queries = QuerySet::parse("q9\tapple\n").unwrap();
        assert!(matches!(
            mine_negatives(&index, &queries, None, &qrels, &MiningConfig::default()),
            Err(Bm25Error::NoPositives(q)) if q == "q9"
        ));
    }

    #[test]
    fn triplet_tsv_round_trip() {
        let (index, queries, qrels) = fixture(30);
        let report =
            mine_negatives(&index, &queries, None, &qrels, &MiningConfig::default()).unwrap();
        assert_eq!(
            TripletSet::parse(&report.triplets.to_tsv()).unwrap(),
            report.triplets
        );
        assert!(TripletSet::parse("a\tb\n").is_err());
    }
}
