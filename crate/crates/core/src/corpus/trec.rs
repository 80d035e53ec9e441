//! TREC qrels (`qid 0 docid rel`) and run (`qid Q0 docid rank score tag`) files.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::{numbered_lines, read_to_string, CorpusError};

/// Relevance judgments, `query -> doc -> relevance`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl QrelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: &str, doc: &str, relevance: u32) -> Result<(), CorpusError> {
        let docs = self.judgments.entry(query.to_owned()).or_default();
        if docs.contains_key(doc) {
            return Err(CorpusError::DuplicatePair {
                query: query.to_owned(),
                doc: doc.to_owned(),
            });
        }
        docs.insert(doc.to_owned(), relevance);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut qrels = Self::new();
        for (line_no, line) in numbered_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 4 {
                return Err(CorpusError::malformed(
                    line_no,
                    format!("expected 4 fields, found {}", fields.len()),
                ));
            }
            let rel: i64 = fields[3]
                .parse()
                .map_err(|_| CorpusError::malformed(line_no, "relevance is not an integer"))?;
            if rel < 0 {
                return Err(CorpusError::NegativeRelevance { line: line_no });
            }
            let rel = u32::try_from(rel)
                .map_err(|_| CorpusError::malformed(line_no, "relevance out of range"))?;
            qrels.insert(fields[0], fields[2], rel)?;
        }
        Ok(qrels)
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    pub fn contains_query(&self, query: &str) -> bool {
        self.judgments.contains_key(query)
    }

    pub fn judgments(&self, query: &str) -> Option<&BTreeMap<String, u32>> {
        self.judgments.get(query)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// Documents judged at least `threshold` for `query`.
    pub fn positives(&self, query: &str, threshold: u32) -> BTreeSet<&str> {
        self.judgments
            .get(query)
            .map(|docs| {
                docs.iter()
                    .filter(|(_, &r)| r >= threshold)
                    .map(|(d, _)| d.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (q, docs) in &self.judgments {
            for (d, r) in docs {
                let _ = writeln!(out, "{q} 0 {d} {r}");
            }
        }
        out
    }
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<QrelSet, CorpusError> {
    QrelSet::parse(&read_to_string(path.as_ref())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedDoc {
    pub doc_id: String,
    /// 1-based.
    pub rank: usize,
    pub score: f64,
}

/// A ranking per query plus the system tag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSet {
    run_tag: String,
    rankings: BTreeMap<String, Vec<RankedDoc>>,
}

impl RunSet {
    pub fn new(run_tag: impl Into<String>) -> Self {
        Self {
            run_tag: run_tag.into(),
            rankings: BTreeMap::new(),
        }
    }

    /// Adds a ranking given in rank order; ranks are assigned 1..n.
    pub fn insert_ranking<I>(&mut self, query: &str, docs: I) -> Result<(), CorpusError>
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let ranked: Vec<RankedDoc> = docs
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RankedDoc {
                doc_id,
                rank: i + 1,
                score,
            })
            .collect();
        validate_ranking(query, &ranked)?;
        self.rankings.insert(query.to_owned(), ranked);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut tag: Option<String> = None;
        let mut rankings: BTreeMap<String, Vec<RankedDoc>> = BTreeMap::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        for (line_no, line) in numbered_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 6 {
                return Err(CorpusError::malformed(
                    line_no,
                    format!("expected 6 fields, found {}", fields.len()),
                ));
            }
            let rank: usize = fields[3]
                .parse()
                .map_err(|_| CorpusError::malformed(line_no, "rank is not a positive integer"))?;
            let score: f64 = fields[4]
                .parse()
                .map_err(|_| CorpusError::malformed(line_no, "score is not a number"))?;
            if !score.is_finite() {
                return Err(CorpusError::malformed(line_no, "score is not finite"));
            }
            match &tag {
                None => tag = Some(fields[5].to_owned()),
                Some(t) if t != fields[5] => {
                    return Err(CorpusError::malformed(
                        line_no,
                        "run tag differs from first line",
                    ))
                }
                Some(_) => {}
            }
            if !seen.insert((fields[0].to_owned(), fields[2].to_owned())) {
                return Err(CorpusError::DuplicateDocForQuery {
                    query: fields[0].to_owned(),
                    doc: fields[2].to_owned(),
                });
            }
            rankings
                .entry(fields[0].to_owned())
                .or_default()
                .push(RankedDoc {
                    doc_id: fields[2].to_owned(),
                    rank,
                    score,
                });
        }
        for (query, docs) in rankings.iter_mut() {
            docs.sort_by_key(|d| d.rank);
            validate_ranking(query, docs)?;
        }
        Ok(Self {
            run_tag: tag.unwrap_or_default(),
            rankings,
        })
    }

    pub fn run_tag(&self) -> &str {
        &self.run_tag
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn ranking(&self, query: &str) -> Option<&[RankedDoc]> {
        self.rankings.get(query).map(Vec::as_slice)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.rankings.keys().map(String::as_str)
    }

    pub fn to_trec_string(&self) -> String {
        let mut out = String::new();
        for (q, docs) in &self.rankings {
            for d in docs {
                let _ = writeln!(
                    out,
                    "{q} Q0 {} {} {} {}",
                    d.doc_id, d.rank, d.score, self.run_tag
                );
            }
        }
        out
    }
}

fn validate_ranking(query: &str, docs: &[RankedDoc]) -> Result<(), CorpusError> {
    let mut seen = HashSet::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        if d.rank != i + 1 {
            return Err(CorpusError::NonContiguousRanks {
                query: query.to_owned(),
            });
        }
        if !seen.insert(d.doc_id.as_str()) {
            return Err(CorpusError::DuplicateDocForQuery {
                query: query.to_owned(),
                doc: d.doc_id.clone(),
            });
        }
        if i > 0 && d.score > docs[i - 1].score {
            return Err(CorpusError::UnorderedScores {
                query: query.to_owned(),
                rank: d.rank,
            });
        }
    }
    Ok(())
}

pub fn load_run(path: impl AsRef<Path>) -> Result<RunSet, CorpusError> {
    RunSet::parse(&read_to_string(path.as_ref())?)
}
