use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricError;

pub const MRR_CUTOFF: usize = 10;

/// Reciprocal rank of the first positive within the top `k`, else 0.
pub fn mrr_at_k<S: AsRef<str>>(ranking: &[S], positives: &BTreeSet<&str>, k: usize) -> f64 {
    ranking
        .iter()
        .take(k)
        .position(|d| positives.contains(d.as_ref()))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Bounded atomized search length: for each positive, the number of
/// non-positive documents ranked above it within the top `bound`; a positive
/// outside the top `bound` counts as `bound`. Averaged over positives.
pub fn asl<S: AsRef<str>>(
    ranking: &[S],
    positives: &BTreeSet<&str>,
    bound: usize,
) -> Result<f64, MetricError> {
    if bound == 0 {
        return Err(MetricError::InvalidParameter(
            "ASL bound must be at least 1".into(),
        ));
    }
    if positives.is_empty() {
        return Err(MetricError::NoPositives);
    }
    let mut irrelevant = 0usize;
    let mut found = 0usize;
    let mut total = 0usize;
    for doc in ranking.iter().take(bound) {
        if positives.contains(doc.as_ref()) {
            total += irrelevant;
            found += 1;
        } else {
            irrelevant += 1;
        }
    }
    total += (positives.len() - found) * bound;
    Ok(total as f64 / positives.len() as f64)
}

/// Fraction of positives retrieved in the top `k`.
pub fn recall_at_k<S: AsRef<str>>(
    ranking: &[S],
    positives: &BTreeSet<&str>,
    k: usize,
) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidParameter("k must be at least 1".into()));
    }
    if positives.is_empty() {
        return Err(MetricError::NoPositives);
    }
    let hits = ranking
        .iter()
        .take(k)
        .filter(|d| positives.contains(d.as_ref()))
        .count();
    Ok(hits as f64 / positives.len() as f64)
}

/// Metric selection, written `mrr@10`, `asl@100` or `recall@1000`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Metric {
    Mrr { cutoff: usize },
    Asl { bound: usize },
    Recall { k: usize },
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Mrr { cutoff: MRR_CUTOFF }
    }
}

impl Metric {
    /// Value assigned to a query missing from a run.
    pub fn worst_value(&self) -> f64 {
        match *self {
            Metric::Asl { bound } => bound as f64,
            Metric::Mrr { .. } | Metric::Recall { .. } => 0.0,
        }
    }

    pub fn higher_is_better(&self) -> bool {
        !matches!(self, Metric::Asl { .. })
    }

    pub fn evaluate<S: AsRef<str>>(
        &self,
        ranking: &[S],
        positives: &BTreeSet<&str>,
    ) -> Result<f64, MetricError> {
        match *self {
            Metric::Mrr { cutoff } => Ok(mrr_at_k(ranking, positives, cutoff)),
            Metric::Asl { bound } => asl(ranking, positives, bound),
            Metric::Recall { k } => recall_at_k(ranking, positives, k),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Mrr { cutoff } => write!(f, "mrr@{cutoff}"),
            Metric::Asl { bound } => write!(f, "asl@{bound}"),
            Metric::Recall { k } => write!(f, "recall@{k}"),
        }
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (name, depth) = match lower.split_once('@') {
            Some((n, d)) => {
                let d: usize = d
                    .parse()
                    .map_err(|_| MetricError::UnknownMetric(s.to_owned()))?;
                if d == 0 {
                    return Err(MetricError::UnknownMetric(s.to_owned()));
                }
                (n.to_owned(), Some(d))
            }
            None => (lower, None),
        };
        match name.as_str() {
            "mrr" => Ok(Metric::Mrr {
                cutoff: depth.unwrap_or(MRR_CUTOFF),
            }),
            "asl" => Ok(Metric::Asl {
                bound: depth.unwrap_or(100),
            }),
            "recall" => Ok(Metric::Recall {
                k: depth.unwrap_or(1000),
            }),
            _ => Err(MetricError::UnknownMetric(s.to_owned())),
        }
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for Metric {
    type Error = MetricError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ranking(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("d{i}")).collect()
    }

    fn pos<'a>(ids: &[&'a str]) -> BTreeSet<&'a str> {
        ids.iter().copied().collect()
    }

    #[test]
    fn mrr_examples() {
        let r = ranking(20);
        assert_eq!(mrr_at_k(&r, &pos(&["d1"]), 10), 1.0);
        assert_eq!(mrr_at_k(&r, &pos(&["d4"]), 10), 0.25);
        assert_eq!(mrr_at_k(&r, &pos(&["d11"]), 10), 0.0);
        assert_eq!(mrr_at_k(&r, &pos(&["d10", "d3"]), 10), 1.0 / 3.0);
    }

    #[test]
    fn asl_examples() {
        let r = ranking(200);
        assert_eq!(asl(&r, &pos(&["d1"]), 100), Ok(0.0));
        assert_eq!(asl(&r, &pos(&["d5"]), 100), Ok(4.0));
        assert_eq!(asl(&r, &pos(&["d150"]), 100), Ok(100.0));
        assert_eq!(asl(&r, &pos(&["missing"]), 100), Ok(100.0));
        // Positives at ranks 2 and 4: one and two irrelevant docs above.
        assert_eq!(asl(&r, &pos(&["d2", "d4"]), 100), Ok(1.5));
        assert_eq!(asl(&r, &pos(&[]), 100), Err(MetricError::NoPositives));
    }

    #[test]
    fn recall_examples() {
        let r = ranking(5);
        assert_eq!(recall_at_k(&r, &pos(&["d1", "d5"]), 1000), Ok(1.0));
        assert_eq!(recall_at_k(&r, &pos(&["x"]), 1000), Ok(0.0));
        assert_eq!(recall_at_k(&r, &pos(&["d2", "x"]), 1000), Ok(0.5));
        assert_eq!(
            recall_at_k(&r, &pos(&[]), 10),
            Err(MetricError::NoPositives)
        );
    }

    #[test]
    fn metric_names() {
        for s in ["mrr@10", "asl@100", "recall@1000"] {
            assert_eq!(s.parse::<Metric>().unwrap().to_string(), s);
        }
        assert_eq!("MRR".parse::<Metric>().unwrap(), Metric::Mrr { cutoff: 10 });
        assert!("ndcg@10".parse::<Metric>().is_err());
        assert!("mrr@0".parse::<Metric>().is_err());
        let json = serde_json::to_string(&Metric::Asl { bound: 100 }).unwrap();
        assert_eq!(json, "\"asl@100\"");
        assert_eq!(
            serde_json::from_str::<Metric>(&json).unwrap(),
            Metric::Asl { bound: 100 }
        );
    }

    proptest! {
        #[test]
        fn tail_permutations_do_not_matter(
            n in 12usize..150,
            positive_ranks in prop::collection::btree_set(1usize..150, 1..4),
            seed in any::<u64>(),
        ) {
            let r = ranking(n);
            let names: Vec<String> = positive_ranks.iter().map(|i| format!("d{i}")).collect();
            let p: BTreeSet<&str> = names.iter().map(String::as_str).collect();
            let mut shuffled = r.clone();
            let mut rng = crate::seed::rng(seed);
            use rand::seq::SliceRandom;
            shuffled[10..].shuffle(&mut rng);
            prop_assert_eq!(mrr_at_k(&r, &p, 10), mrr_at_k(&shuffled, &p, 10));
            if n > 100 {
                let mut s = r.clone();
                s[100..].shuffle(&mut rng);
                prop_assert_eq!(asl(&r, &p, 100), asl(&s, &p, 100));
            }
        }

        #[test]
        fn promoting_a_positive_never_raises_asl(
            n in 2usize..120,
            positive_ranks in prop::collection::btree_set(1usize..120, 1..4),
            swap_at in 1usize..119,
        ) {
            let mut r = ranking(n);
            let names: Vec<String> = positive_ranks.iter().map(|i| format!("d{i}")).collect();
            let p: BTreeSet<&str> = names.iter().map(String::as_str).collect();
            let i = swap_at.min(n - 1);
            if p.contains(r[i].as_str()) && !p.contains(r[i - 1].as_str()) {
                let before = asl(&r, &p, 100).unwrap();
                r.swap(i - 1, i);
                prop_assert!(asl(&r, &p, 100).unwrap() <= before);
            }
        }
    }
}
