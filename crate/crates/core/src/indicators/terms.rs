use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::IndicatorError;
use crate::corpus::tokenize;
use crate::scalar::{CompensatedSum, Scalar};

/// Normalized term frequencies of a set of queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct TermDistribution<T> {
    freqs: BTreeMap<String, T>,
    query_count: usize,
}

impl<T: Scalar> TermDistribution<T> {
    /// Takes frequencies as given; they must be non-negative, finite, and sum
    /// to 1 within 1e-9.
    pub fn from_frequencies(
        freqs: BTreeMap<String, T>,
        query_count: usize,
    ) -> Result<Self, IndicatorError> {
        if freqs.is_empty() {
            return Err(IndicatorError::EmptyVocabulary);
        }
        if let Some((t, _)) = freqs
            .iter()
            .find(|(_, f)| !f.is_finite() || **f < T::zero())
        {
            return Err(IndicatorError::InvalidDistribution(format!(
                "bad frequency for {t:?}"
            )));
        }
        let total: CompensatedSum<T> = freqs.values().copied().collect();
        let total = total.value().to_f64_lossy();
        if (total - 1.0).abs() > 1e-9 {
            return Err(IndicatorError::InvalidDistribution(format!(
                "frequencies sum to {total}"
            )));
        }
        Ok(TermDistribution { freqs, query_count })
    }

    pub fn frequencies(&self) -> &BTreeMap<String, T> {
        &self.freqs
    }

    pub fn get(&self, term: &str) -> T {
        self.freqs.get(term).copied().unwrap_or_else(T::zero)
    }

    pub fn query_count(&self) -> usize {
        self.query_count
    }

    pub fn vocabulary_size(&self) -> usize {
        self.freqs.len()
    }
}

/// Token counts over all `texts`, divided by the total token count.
pub fn term_distribution<T, I, S>(texts: I) -> Result<TermDistribution<T>, IndicatorError>
where
    T: Scalar,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    let mut query_count = 0usize;
    for text in texts {
        query_count += 1;
        for tok in tokenize(text.as_ref()).into_vec() {
            *counts.entry(tok).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(IndicatorError::EmptyVocabulary);
    }
    let n = T::from_usize_lossy(total);
    let freqs = counts
        .into_iter()
        .map(|(t, c)| (t, T::from_usize_lossy(c) / n))
        .collect();
    Ok(TermDistribution { freqs, query_count })
}

/// `Σ min(S_k, T_k) / Σ max(S_k, T_k)` over the union vocabulary.
pub fn weighted_jaccard<T: Scalar>(s: &TermDistribution<T>, t: &TermDistribution<T>) -> T {
    let mut lo = CompensatedSum::new();
    let mut hi = CompensatedSum::new();
    let mut a = s.freqs.iter().peekable();
    let mut b = t.freqs.iter().peekable();
    loop {
        let (x, y) = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => (*a.next().unwrap().1, T::zero()),
            (None, Some(_)) => (T::zero(), *b.next().unwrap().1),
            (Some((ka, _)), Some((kb, _))) => match ka.cmp(kb) {
                Ordering::Less => (*a.next().unwrap().1, T::zero()),
                Ordering::Greater => (T::zero(), *b.next().unwrap().1),
                Ordering::Equal => (*a.next().unwrap().1, *b.next().unwrap().1),
            },
        };
        lo.add(x.min(y));
        hi.add(x.max(y));
    }
    let hi = hi.value();
    if hi == T::zero() {
        return T::zero();
    }
    lo.value() / hi
}
