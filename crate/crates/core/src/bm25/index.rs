use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Bm25Error;
use crate::corpus::{tokenize, Collection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 0.9, b: 0.4 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<(), Bm25Error> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return Err(Bm25Error::InvalidParameter(format!("k1 = {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Bm25Error::InvalidParameter(format!("b = {}", self.b)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    pub(super) postings: HashMap<String, Vec<Posting>>,
    pub(super) doc_lengths: Vec<u32>,
    pub(super) doc_ids: Vec<String>,
    pub(super) avgdl: f64,
}

impl InvertedIndex {
    pub(super) fn from_parts(
        postings: HashMap<String, Vec<Posting>>,
        doc_lengths: Vec<u32>,
        doc_ids: Vec<String>,
    ) -> Self {
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        let avgdl = if doc_lengths.is_empty() {
            0.0
        } else {
            total as f64 / doc_lengths.len() as f64
        };
        Self {
            postings,
            doc_lengths,
            doc_ids,
            avgdl,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn doc_length(&self, doc: usize) -> u32 {
        self.doc_lengths[doc]
    }

    pub fn doc_id(&self, doc: usize) -> &str {
        &self.doc_ids[doc]
    }

    /// Postings of `term`, sorted by document ordinal.
    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn term_frequency(&self, term: &str, doc: usize) -> u32 {
        let list = self.postings(term);
        list.binary_search_by_key(&(doc as u32), |p| p.doc)
            .map_or(0, |i| list[i].tf)
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
    pub fn idf(&self, df: usize) -> f64 {
        let n = self.doc_count() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    #[inline]
    fn term_weight(&self, params: &Bm25Params, idf: f64, tf: u32, doc: usize) -> f64 {
        let tf = f64::from(tf);
        let dl = f64::from(self.doc_lengths[doc]);
        idf * (tf * (params.k1 + 1.0))
            / (tf + params.k1 * (1.0 - params.b + params.b * dl / self.avgdl))
    }
}

pub fn build_index(collection: &Collection) -> Result<InvertedIndex, Bm25Error> {
    if collection.is_empty() {
        return Err(Bm25Error::EmptyCollection);
    }
    let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
    let mut doc_lengths = Vec::with_capacity(collection.len());
    let mut doc_ids = Vec::with_capacity(collection.len());
    let mut counts: HashMap<String, u32> = HashMap::new();
    for (ordinal, (id, text)) in collection.iter().enumerate() {
        let tokens = tokenize(text);
        doc_lengths.push(tokens.len() as u32);
        doc_ids.push(id.to_owned());
        counts.clear();
        for t in tokens.into_vec() {
            *counts.entry(t).or_insert(0) += 1;
        }
        for (term, tf) in counts.drain() {
            postings.entry(term).or_default().push(Posting {
                doc: ordinal as u32,
                tf,
            });
        }
    }
    Ok(InvertedIndex::from_parts(postings, doc_lengths, doc_ids))
}

/// BM25 of one document. Every query token occurrence contributes, so a
/// repeated query term counts once per occurrence.
pub fn bm25_score(
    index: &InvertedIndex,
    params: &Bm25Params,
    query_tokens: &[String],
    doc: usize,
) -> f64 {
    let mut score = 0.0;
    for term in query_tokens {
        let tf = index.term_frequency(term, doc);
        if tf > 0 {
            let idf = index.idf(index.document_frequency(term));
            score += index.term_weight(params, idf, tf, doc);
        }
    }
    score
}

fn by_score_then_id(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Top `k` documents containing at least one query term, ordered by score
/// descending then doc id ascending. Scoring is exhaustive term-at-a-time.
pub fn search(
    index: &InvertedIndex,
    params: &Bm25Params,
    query_text: &str,
    k: usize,
) -> Vec<(String, f64)> {
    let tokens = tokenize(query_text);
    if k == 0 || tokens.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0.0f64; index.doc_count()];
    let mut touched: Vec<u32> = Vec::new();
    let mut seen = vec![false; index.doc_count()];
    for term in tokens.iter() {
        let list = index.postings(term);
        if list.is_empty() {
            continue;
        }
        let idf = index.idf(list.len());
        for p in list {
            let d = p.doc as usize;
            acc[d] += index.term_weight(params, idf, p.tf, d);
            if !seen[d] {
                seen[d] = true;
                touched.push(p.doc);
            }
        }
    }
    let mut hits: Vec<(String, f64)> = touched
        .into_iter()
        .map(|d| (index.doc_ids[d as usize].clone(), acc[d as usize]))
        .collect();
    if hits.len() > k {
        hits.select_nth_unstable_by(k - 1, by_score_then_id);
        hits.truncate(k);
    }
    hits.sort_by(by_score_then_id);
    hits
}
