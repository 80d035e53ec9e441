use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{quantile_type7, IndicatorError, SimilarityScore};
use crate::harness::{column_aggregate, EvalMatrix};
use crate::scalar::mean;

#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Equal-population bins over the sorted scores.
    Quantiles(usize),
    /// Strictly increasing edges `e0 < e1 < ... < eB`. Only the interior
    /// edges decide assignment, so scores outside `[e0, eB]` land in the
    /// first or last bin.
    Edges(Vec<f64>),
}

impl Default for Binning {
    fn default() -> Self {
        Binning::Quantiles(5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Type-7 quartiles; `None` for empty input.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(FiveNumber {
            min: *v.first()?,
            q1: quantile_type7(&v, 0.25)?,
            median: quantile_type7(&v, 0.5)?,
            q3: quantile_type7(&v, 0.75)?,
            max: *v.last()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub low: f64,
    pub high: f64,
    pub count: usize,
    pub avg_in: Option<f64>,
    pub out: Option<f64>,
    /// `None` for an empty bin or a zero in-domain average.
    pub rel_loss: Option<f64>,
    /// Spread of per-query relative loss `(in - out) / in`, over the bin's
    /// queries with a non-zero in-domain mean.
    pub query_loss: Option<FiveNumber>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub edges: Vec<f64>,
    pub bins: Vec<BinStats>,
    /// Indices of bins without queries.
    pub empty_bins: Vec<usize>,
}

impl BinReport {
    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

fn edges_for(values: &[f64], binning: &Binning) -> Result<Vec<f64>, IndicatorError> {
    match binning {
        Binning::Quantiles(0) => Err(IndicatorError::InvalidBins(
            "bin count must be positive".into(),
        )),
        Binning::Quantiles(b) => {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let mut edges: Vec<f64> = (0..*b).map(|i| sorted[i * n / b]).collect();
            edges.push(sorted[n - 1]);
            Ok(edges)
        }
        Binning::Edges(e) => {
            if e.len() < 2 {
                return Err(IndicatorError::InvalidBins(
                    "need at least two edges".into(),
                ));
            }
            if e.iter().any(|x| !x.is_finite()) || e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(IndicatorError::InvalidBins(
                    "edges must be finite and strictly increasing".into(),
                ));
            }
            Ok(e.clone())
        }
    }
}

/// Groups scored queries by similarity and summarizes each group's
/// in-domain versus zero-shot values.
///
/// Every score must name a query of some column of `matrix`. A bin holding
/// queries of one column is summarized exactly as that column restricted to
/// those queries; a bin spanning columns pools the per-query pairs.
pub fn bin_by_similarity(
    scores: &[SimilarityScore],
    matrix: &EvalMatrix,
    binning: &Binning,
) -> Result<BinReport, IndicatorError> {
    if scores.is_empty() {
        return Err(IndicatorError::InvalidBins("no scores".into()));
    }
    let mut location: HashMap<&str, (usize, usize)> = HashMap::new();
    for j in 0..matrix.cols().len() {
        if matrix.zero_shot_row(j).is_none() {
            continue;
        }
        for (k, q) in matrix.query_ids(j).iter().enumerate() {
            location.insert(q.as_str(), (j, k));
        }
    }
    let mut seen = HashSet::new();
    for s in scores {
        if !s.value.is_finite() {
            return Err(IndicatorError::InvalidBins(format!(
                "score of {:?} is not finite",
                s.query_id
            )));
        }
        if !seen.insert(s.query_id.as_str()) {
            return Err(IndicatorError::InvalidBins(format!(
                "query {:?} scored twice",
                s.query_id
            )));
        }
        if !location.contains_key(s.query_id.as_str()) {
            return Err(IndicatorError::UnscoredQuery(s.query_id.clone()));
        }
    }

    let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
    let edges = edges_for(&values, binning)?;
    let n_bins = edges.len() - 1;
    let interior = &edges[1..n_bins];

    // bin -> column -> query positions, each in ascending order.
    let mut members: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); n_bins];
    for s in scores {
        let bin = interior.iter().filter(|&&e| e <= s.value).count();
        let (j, k) = location[s.query_id.as_str()];
        members[bin].entry(j).or_default().push(k);
    }

    let mut bins = Vec::with_capacity(n_bins);
    let mut empty_bins = Vec::new();
    for (b, by_col) in members.iter_mut().enumerate() {
        let (low, high) = (edges[b], edges[b + 1]);
        let count: usize = by_col.values().map(Vec::len).sum();
        if count == 0 {
            empty_bins.push(b);
            bins.push(BinStats {
                low,
                high,
                count,
                avg_in: None,
                out: None,
                rel_loss: None,
                query_loss: None,
            });
            continue;
        }
        let mut query_in = Vec::with_capacity(count);
        let mut query_out = Vec::with_capacity(count);
        let mut single = None;
        for (&j, ks) in by_col.iter_mut() {
            ks.sort_unstable();
            let agg = column_aggregate(matrix, j, Some(ks))?;
            query_in.extend_from_slice(&agg.query_in);
            query_out.extend_from_slice(&agg.query_out);
            single = Some(agg);
        }
        let (avg_in, out) = match (by_col.len(), single) {
            (1, Some(agg)) => (agg.avg_in, agg.out),
            _ => (
                mean(&query_in).unwrap_or(0.0),
                mean(&query_out).unwrap_or(0.0),
            ),
        };
        let losses: Vec<f64> = query_in
            .iter()
            .zip(&query_out)
            .filter(|(i, _)| **i != 0.0)
            .map(|(i, o)| (i - o) / i)
            .collect();
        bins.push(BinStats {
            low,
            high,
            count,
            avg_in: Some(avg_in),
            out: Some(out),
            rel_loss: (avg_in != 0.0).then(|| (avg_in - out) / avg_in),
            query_loss: FiveNumber::of(&losses),
        });
    }
    Ok(BinReport {
        edges,
        bins,
        empty_bins,
    })
}

/// Header `bin_low,bin_high,count,avg_in,out,rel_loss,min,q1,median,q3,max`;
/// undefined values are left blank.
pub fn bins_csv(report: &BinReport) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut out = String::from("bin_low,bin_high,count,avg_in,out,rel_loss,min,q1,median,q3,max\n");
    for b in &report.bins {
        let f = b.query_loss;
        let fields = [
            b.low.to_string(),
            b.high.to_string(),
            b.count.to_string(),
            opt(b.avg_in),
            opt(b.out),
            opt(b.rel_loss),
            opt(f.map(|f| f.min)),
            opt(f.map(|f| f.q1)),
            opt(f.map(|f| f.median)),
            opt(f.map(|f| f.q3)),
            opt(f.map(|f| f.max)),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::summarize;
    use crate::metrics::Metric;

    /// Two clusters A and B with `n` test queries each; column A's zero-shot
    /// values are `zero_shot`, everything else is `in_value`.
    fn matrix(n: usize, in_value: f64, zero_shot: &[f64]) -> EvalMatrix {
        let ids = |c: &str| (0..n).map(|i| format!("{c}{i}")).collect::<Vec<_>>();
        EvalMatrix::new(
            Metric::default(),
            vec![("not_A".into(), "A".into()), ("not_B".into(), "B".into())],
            vec![("A".into(), ids("A")), ("B".into(), ids("B"))],
            vec![
                vec![zero_shot.to_vec(), vec![in_value; n]],
                vec![vec![in_value; n], vec![in_value; n]],
            ],
        )
        .unwrap()
    }

    fn scores(prefix: &str, values: &[f64]) -> Vec<SimilarityScore> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| SimilarityScore {
                query_id: format!("{prefix}{i}"),
                value: v,
            })
            .collect()
    }

    #[test]
    fn low_similarity_bin_loses_more() {
        // Queries 0..5 have low R and halved zero-shot values.
        let zero: Vec<f64> = (0..10).map(|i| if i < 5 { 0.3 } else { 0.6 }).collect();
        let m = matrix(10, 0.6, &zero);
        let r: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let report = bin_by_similarity(&scores("A", &r), &m, &Binning::Quantiles(2)).unwrap();
        assert_eq!(report.bins[0].count, 5);
        assert_eq!(report.bins[1].count, 5);
        assert!((report.bins[0].rel_loss.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(report.bins[1].rel_loss, Some(0.0));
        assert!(report.bins[0].rel_loss > report.bins[1].rel_loss);
        let f = report.bins[0].query_loss.unwrap();
        assert!((f.median - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_bin_matches_summary() {
        let zero = [0.1, 0.9, 0.35, 0.2, 0.0, 0.7, 0.3];
        let m = matrix(7, 0.55, &zero);
        let r = [0.3, -1.0, 2.0, 0.1, 0.1, 5.0, 0.0];
        let report = bin_by_similarity(&scores("A", &r), &m, &Binning::Quantiles(1)).unwrap();
        let s = &summarize(&m).unwrap()[0];
        assert_eq!(report.bins.len(), 1);
        assert_eq!(report.bins[0].rel_loss, Some(s.rel_loss));
        assert_eq!(report.bins[0].avg_in, Some(s.avg_in));
        assert_eq!(report.bins[0].out, Some(s.out));
    }

    #[test]
    fn equal_scores_fill_only_the_last_bin() {
        let m = matrix(6, 0.5, &[0.25; 6]);
        let report = bin_by_similarity(&scores("A", &[1.0; 6]), &m, &Binning::default()).unwrap();
        assert_eq!(report.empty_bins, [0, 1, 2, 3]);
        assert_eq!(report.bins[4].count, 6);
        assert_eq!(report.total_count(), 6);
    }

    #[test]
    fn quantile_populations_differ_by_at_most_one() {
        let m = matrix(23, 0.5, &[0.25; 23]);
        let r: Vec<f64> = (0..23).map(|i| ((i * 7919) % 23) as f64 * 0.37).collect();
        for b in 1..=8 {
            let report = bin_by_similarity(&scores("A", &r), &m, &Binning::Quantiles(b)).unwrap();
            let counts: Vec<usize> = report.bins.iter().map(|x| x.count).collect();
            assert_eq!(counts.iter().sum::<usize>(), 23);
            assert!(
                counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn explicit_edges_cover_outliers_and_report_empty_bins() {
        let m = matrix(4, 0.5, &[0.25; 4]);
        let report = bin_by_similarity(
            &scores("A", &[-5.0, 0.5, 0.6, 99.0]),
            &m,
            &Binning::Edges(vec![0.0, 1.0, 2.0, 3.0]),
        )
        .unwrap();
        let counts: Vec<usize> = report.bins.iter().map(|x| x.count).collect();
        assert_eq!(counts, [3, 0, 1]);
        assert_eq!(report.empty_bins, [1]);
        assert!(bins_csv(&report)
            .lines()
            .nth(2)
            .unwrap()
            .starts_with("1,2,0,,,"));
        assert!(
            bin_by_similarity(&scores("A", &[0.0]), &m, &Binning::Edges(vec![1.0, 1.0])).is_err()
        );
    }

    #[test]
    fn spans_columns_by_pooling_queries() {
        let m = matrix(2, 0.5, &[0.25, 0.25]);
        let mut s = scores("A", &[0.0, 1.0]);
        s.extend(scores("B", &[2.0, 3.0]));
        let report = bin_by_similarity(&s, &m, &Binning::Quantiles(1)).unwrap();
        assert_eq!(report.bins[0].avg_in, Some(0.5));
        assert_eq!(report.bins[0].out, Some(0.375));
        assert!(matches!(
            bin_by_similarity(&scores("Z", &[1.0]), &m, &Binning::Quantiles(1)),
            Err(IndicatorError::UnscoredQuery(_))
        ));
    }
}
