use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{term_distribution, weighted_jaccard, IndicatorError, TermDistribution};
use crate::corpus::QuerySet;
use crate::harness::ShiftSummary;
use crate::shift::ShiftManifest;

/// Which query sets the Jaccard of a cluster compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JaccardMode {
    /// Whole cluster against the whole complement (train and test pooled).
    #[default]
    Pooled,
    /// Cluster test split against the complement's train splits.
    Strict,
}

impl FromStr for JaccardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pooled" => Ok(JaccardMode::Pooled),
            "strict" => Ok(JaccardMode::Strict),
            other => Err(format!(
                "unknown jaccard mode {other:?} (expected pooled or strict)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardLossRow {
    pub cluster: String,
    pub jaccard: f64,
    pub rel_loss: f64,
}

fn texts<'a>(
    queries: &'a QuerySet,
    ids: impl Iterator<Item = &'a str>,
) -> Result<Vec<&'a str>, IndicatorError> {
    ids.map(|id| {
        queries
            .get(id)
            .ok_or_else(|| IndicatorError::UnknownId(id.to_owned()))
    })
    .collect()
}

/// Pairs each cluster's Jaccard similarity to its complement with the
/// cluster's relative loss. `summaries` must follow the manifest's cluster
/// order.
pub fn jaccard_loss_table(
    manifest: &ShiftManifest,
    queries: &QuerySet,
    summaries: &[ShiftSummary],
    mode: JaccardMode,
) -> Result<Vec<JaccardLossRow>, IndicatorError> {
    let expected: Vec<String> = manifest.clusters.iter().map(|c| c.name.clone()).collect();
    let found: Vec<String> = summaries.iter().map(|s| s.eval_set.clone()).collect();
    if expected != found {
        return Err(IndicatorError::ClusterMismatch { expected, found });
    }
    manifest
        .clusters
        .par_iter()
        .zip(summaries.par_iter())
        .enumerate()
        .map(|(i, (cluster, summary))| {
            let others = manifest
                .clusters
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, c)| c);
            let (inside, outside) = match mode {
                JaccardMode::Pooled => (
                    texts(queries, cluster.members())?,
                    texts(queries, others.flat_map(|c| c.members()))?,
                ),
                JaccardMode::Strict => (
                    texts(queries, cluster.test.iter().map(String::as_str))?,
                    texts(
                        queries,
                        others.flat_map(|c| c.train.iter().map(String::as_str)),
                    )?,
                ),
            };
            let s: TermDistribution<f64> = term_distribution(inside)?;
            let t: TermDistribution<f64> = term_distribution(outside)?;
            Ok(JaccardLossRow {
                cluster: cluster.name.clone(),
                jaccard: weighted_jaccard(&s, &t),
                rel_loss: summary.rel_loss,
            })
        })
        .collect()
}

/// Header `cluster,jaccard,rel_loss`.
pub fn jaccard_loss_csv(rows: &[JaccardLossRow]) -> String {
    let mut out = String::from("cluster,jaccard,rel_loss\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.cluster, r.jaccard, r.rel_loss));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::CellMean;
    use crate::metrics::TTestResult;
    use crate::shift::Cluster;

    fn summary(name: &str, rel_loss: f64) -> ShiftSummary {
        ShiftSummary {
            eval_set: name.into(),
            avg_in: 1.0,
            out: 1.0 - rel_loss,
            rel_loss,
            t_test: TTestResult {
                t_statistic: 0.0,
                degrees_of_freedom: 1,
                p_value: 1.0,
                mean_difference: 0.0,
            },
            cell_means: vec![CellMean {
                train_set: "x".into(),
                mean: 1.0,
            }],
            query_count: 2,
            missing_count: 0,
        }
    }

    fn setup(texts: &[(&str, &str, &str)]) -> (ShiftManifest, QuerySet) {
        let queries = QuerySet::from_entries(
            texts
                .iter()
                .map(|(id, _, t)| (id.to_string(), t.to_string())),
        )
        .unwrap();
        let mut m = ShiftManifest::new("topic", 0);
        for (id, cluster, _) in texts {
            match m.clusters.iter_mut().find(|c| c.name == *cluster) {
                Some(c) => c.test.push(id.to_string()),
                None => m.clusters.push(Cluster {
                    name: cluster.to_string(),
                    train: vec![id.to_string()],
                    test: Vec::new(),
                }),
            }
        }
        (m, queries)
    }

    #[test]
    fn disjoint_and_identical_clusters() {
        let (m, q) = setup(&[
            ("1", "A", "red fox"),
            ("2", "A", "red fox"),
            ("3", "B", "blue whale"),
            ("4", "B", "blue whale"),
        ]);
        let rows = jaccard_loss_table(
            &m,
            &q,
            &[summary("A", 0.5), summary("B", 0.25)],
            JaccardMode::Pooled,
        )
        .unwrap();
        assert_eq!(
            rows.iter().map(|r| r.jaccard).collect::<Vec<_>>(),
            [0.0, 0.0]
        );
        assert_eq!(rows[1].rel_loss, 0.25);

        let (m, q) = setup(&[
            ("1", "A", "same words"),
            ("2", "A", "words same"),
            ("3", "B", "same words"),
            ("4", "B", "Same, words!"),
        ]);
        let rows = jaccard_loss_table(
            &m,
            &q,
            &[summary("A", 0.0), summary("B", 0.0)],
            JaccardMode::Strict,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.jaccard == 1.0));
    }

    #[test]
    fn controlled_overlap_increases() {
        // A, B and C share 0, 50 and 100 percent of their vocabulary with the
        // large background cluster D.
        let mut texts = vec![
            ("a1", "A", "p p"),
            ("a2", "A", "p p"),
            ("b1", "B", "s x"),
            ("b2", "B", "s x"),
            ("c1", "C", "s s"),
            ("c2", "C", "s s"),
        ];
        let d_ids: Vec<String> = (0..20).map(|i| format!("d{i}")).collect();
        texts.extend(d_ids.iter().map(|id| (id.as_str(), "D", "s s")));
        let (m, q) = setup(&texts);
        let s = [
            summary("A", 0.3),
            summary("B", 0.2),
            summary("C", 0.1),
            summary("D", 0.0),
        ];
        let rows = jaccard_loss_table(&m, &q, &s, JaccardMode::Pooled).unwrap();
        assert_eq!(rows[0].jaccard, 0.0);
        assert!((rows[1].jaccard - 1.0 / 3.0).abs() < 1e-12);
        assert!((rows[2].jaccard - 0.875 / 1.125).abs() < 1e-12);
        assert_eq!(jaccard_loss_csv(&rows).lines().count(), 5);
    }

    #[test]
    fn mismatch_and_unknown_ids() {
        let (m, q) = setup(&[("1", "A", "a"), ("2", "B", "b")]);
        assert!(matches!(
            jaccard_loss_table(
                &m,
                &q,
                &[summary("B", 0.0), summary("A", 0.0)],
                JaccardMode::Pooled
            ),
            Err(IndicatorError::ClusterMismatch { .. })
        ));
        let (m2, _) = setup(&[("1", "A", "a"), ("9", "B", "b")]);
        assert!(matches!(
            jaccard_loss_table(&m2, &q, &[summary("A", 0.0), summary("B", 0.0)], JaccardMode::Pooled),
            Err(IndicatorError::UnknownId(id)) if id == "9"
        ));
    }
}
