use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::HarnessError;
use crate::corpus::{QrelSet, RunSet};
use crate::metrics::Metric;
use crate::shift::ExperimentPlan;

/// A query absent from one run's output, scored with the metric's worst value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingQuery {
    pub train_set: String,
    pub eval_set: String,
    pub query_id: String,
}

/// Per-query metric values, indexed `[row][col][query]`.
///
/// Row `i` is a model trained without `held_out[i]`; column `j` is the test
/// split of eval set `j`, with queries in `query_ids[j]` order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMatrix {
    metric: Metric,
    rows: Vec<String>,
    held_out: Vec<String>,
    cols: Vec<String>,
    query_ids: Vec<Vec<String>>,
    cells: Vec<Vec<Vec<f64>>>,
    missing: Vec<MissingQuery>,
}

impl EvalMatrix {
    /// `rows` pairs each training-set name with the eval set it holds out;
    /// `cols` pairs each eval-set name with its query ids.
    pub fn new(
        metric: Metric,
        rows: Vec<(String, String)>,
        cols: Vec<(String, Vec<String>)>,
        cells: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, HarnessError> {
        if cells.len() != rows.len() {
            return Err(HarnessError::Shape(format!(
                "{} rows of cells for {} rows",
                cells.len(),
                rows.len()
            )));
        }
        for (i, row) in cells.iter().enumerate() {
            if row.len() != cols.len() {
                return Err(HarnessError::Shape(format!(
                    "row {i} has {} cells for {} columns",
                    row.len(),
                    cols.len()
                )));
            }
            for (j, cell) in row.iter().enumerate() {
                if cell.len() != cols[j].1.len() {
                    return Err(HarnessError::Shape(format!(
                        "cell ({i},{j}) has {} values for {} queries",
                        cell.len(),
                        cols[j].1.len()
                    )));
                }
                if cell.iter().any(|v| !v.is_finite()) {
                    return Err(HarnessError::Shape(format!(
                        "cell ({i},{j}) holds a non-finite value"
                    )));
                }
            }
        }
        let (rows, held_out) = rows.into_iter().unzip();
        let (cols, query_ids) = cols.into_iter().unzip();
        Ok(EvalMatrix {
            metric,
            rows,
            held_out,
            cols,
            query_ids,
            cells,
            missing: Vec::new(),
        })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn held_out(&self) -> &[String] {
        &self.held_out
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn query_ids(&self, col: usize) -> &[String] {
        &self.query_ids[col]
    }

    pub fn cell(&self, row: usize, col: usize) -> &[f64] {
        &self.cells[row][col]
    }

    pub fn missing(&self) -> &[MissingQuery] {
        &self.missing
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.cols.iter().position(|c| c == name)
    }

    /// Row whose model never saw eval set `col`.
    pub fn zero_shot_row(&self, col: usize) -> Option<usize> {
        self.held_out.iter().position(|h| *h == self.cols[col])
    }

    /// Long form with header `train_set eval_set query_id value`, tab separated.
    pub fn to_long_tsv(&self) -> String {
        let mut out = String::from("train_set\teval_set\tquery_id\tvalue\n");
        for (i, row) in self.rows.iter().enumerate() {
            for (j, col) in self.cols.iter().enumerate() {
                for (q, v) in self.query_ids[j].iter().zip(&self.cells[i][j]) {
                    out.push_str(&format!("{row}\t{col}\t{q}\t{v}\n"));
                }
            }
        }
        out
    }

    /// Header `train_set eval_set query_id`.
    pub fn missing_tsv(&self) -> String {
        let mut out = String::from("train_set\teval_set\tquery_id\n");
        for m in &self.missing {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                m.train_set, m.eval_set, m.query_id
            ));
        }
        out
    }

    /// Rebuilds a matrix written by [`EvalMatrix::to_long_tsv`], laid out as
    /// the plan dictates. Every (experiment, eval set, query) triple of the plan
    /// must appear exactly once.
    pub fn from_long_tsv(
        plan: &ExperimentPlan,
        metric: Metric,
        text: &str,
    ) -> Result<Self, HarnessError> {
        let row_of: HashMap<&str, usize> = plan
            .experiments
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.as_str(), i))
            .collect();
        let col_of: HashMap<&str, usize> = plan
            .eval_sets
            .iter()
            .enumerate()
            .map(|(j, e)| (e.name.as_str(), j))
            .collect();
        let query_pos: Vec<HashMap<&str, usize>> = plan
            .eval_sets
            .iter()
            .map(|e| {
                e.query_ids
                    .iter()
                    .enumerate()
                    .map(|(k, q)| (q.as_str(), k))
                    .collect()
            })
            .collect();
        let mut cells: Vec<Vec<Vec<Option<f64>>>> = plan
            .experiments
            .iter()
            .map(|_| {
                plan.eval_sets
                    .iter()
                    .map(|e| vec![None; e.query_ids.len()])
                    .collect()
            })
            .collect();

        let bad = |line: usize, reason: String| HarnessError::MalformedLine { line, reason };
        let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l));
        match lines.next() {
            Some((_, header)) if header.trim_end() == "train_set\teval_set\tquery_id\tvalue" => {}
            _ => return Err(bad(1, "missing header".into())),
        }
        for (line, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 4 {
                return Err(bad(
                    line,
                    format!("expected 4 fields, found {}", fields.len()),
                ));
            }
            let i = *row_of
                .get(fields[0])
                .ok_or_else(|| bad(line, format!("unknown training set {:?}", fields[0])))?;
            let j = *col_of
                .get(fields[1])
                .ok_or_else(|| bad(line, format!("unknown eval set {:?}", fields[1])))?;
            let k = *query_pos[j].get(fields[2]).ok_or_else(|| {
                bad(
                    line,
                    format!("query {:?} is not in eval set {:?}", fields[2], fields[1]),
                )
            })?;
            let value: f64 = fields[3]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| bad(line, format!("bad value {:?}", fields[3])))?;
            if cells[i][j][k].replace(value).is_some() {
                return Err(bad(line, "duplicate entry".into()));
            }
        }

        let mut dense = Vec::with_capacity(cells.len());
        for (i, row) in cells.into_iter().enumerate() {
            let mut dense_row = Vec::with_capacity(row.len());
            for (j, cell) in row.into_iter().enumerate() {
                let values: Option<Vec<f64>> = cell.into_iter().collect();
                dense_row.push(values.ok_or_else(|| {
                    HarnessError::Shape(format!(
                        "cell ({}, {}) is incomplete",
                        plan.experiments[i].name, plan.eval_sets[j].name
                    ))
                })?);
            }
            dense.push(dense_row);
        }
        EvalMatrix::new(
            metric,
            plan.experiments
                .iter()
                .map(|e| (e.name.clone(), e.held_out.clone()))
                .collect(),
            plan.eval_sets
                .iter()
                .map(|e| (e.name.clone(), e.query_ids.clone()))
                .collect(),
            dense,
        )
    }

    /// Same matrix with every value passed through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in out.cells.iter_mut().flatten().flatten() {
            *v = f(*v);
        }
        out
    }

    /// Reorders columns; `order[j]` names the old index of new column `j`.
    pub fn permute_cols(&self, order: &[usize]) -> Self {
        let mut out = self.clone();
        out.cols = order.iter().map(|&j| self.cols[j].clone()).collect();
        out.query_ids = order.iter().map(|&j| self.query_ids[j].clone()).collect();
        out.cells = self
            .cells
            .iter()
            .map(|row| order.iter().map(|&j| row[j].clone()).collect())
            .collect();
        out
    }
}

/// Scores every run on every eval set of the plan.
///
/// `runs` is keyed by experiment name. Queries a run does not rank receive
/// [`Metric::worst_value`] and are listed in [`EvalMatrix::missing`].
pub fn build_matrix(
    plan: &ExperimentPlan,
    runs: &BTreeMap<String, RunSet>,
    qrels: &QrelSet,
    metric: Metric,
    rel_threshold: u32,
) -> Result<EvalMatrix, HarnessError> {
    let row_runs: Vec<&RunSet> = plan
        .experiments
        .iter()
        .map(|e| {
            runs.get(&e.name)
                .ok_or_else(|| HarnessError::MissingRun(e.name.clone()))
        })
        .collect::<Result<_, _>>()?;
    let positives: Vec<Vec<_>> = plan
        .eval_sets
        .iter()
        .map(|set| {
            set.query_ids
                .iter()
                .map(|q| {
                    let p = qrels.positives(q, rel_threshold);
                    if p.is_empty() {
                        Err(HarnessError::MissingQrels(q.clone()))
                    } else {
                        Ok(p)
                    }
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    type Cell = (Vec<f64>, Vec<MissingQuery>);
    let rows: Vec<Vec<Cell>> = plan
        .experiments
        .par_iter()
        .zip(row_runs.par_iter())
        .map(|(experiment, run)| {
            plan.eval_sets
                .iter()
                .zip(&positives)
                .map(|(set, set_positives)| {
                    let mut values = Vec::with_capacity(set.query_ids.len());
                    let mut missing = Vec::new();
                    for (q, pos) in set.query_ids.iter().zip(set_positives) {
                        match run.ranking(q) {
                            Some(ranking) => {
                                let ids: Vec<&str> =
                                    ranking.iter().map(|d| d.doc_id.as_str()).collect();
                                values.push(metric.evaluate(&ids, pos)?);
                            }
                            None => {
                                values.push(metric.worst_value());
                                missing.push(MissingQuery {
                                    train_set: experiment.name.clone(),
                                    eval_set: set.name.clone(),
                                    query_id: q.clone(),
                                });
                            }
                        }
                    }
                    Ok((values, missing))
                })
                .collect::<Result<Vec<Cell>, HarnessError>>()
        })
        .collect::<Result<_, _>>()?;

    let mut missing = Vec::new();
    let cells = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(values, m)| {
                    missing.extend(m);
                    values
                })
                .collect()
        })
        .collect();
    let mut matrix = EvalMatrix::new(
        metric,
        plan.experiments
            .iter()
            .map(|e| (e.name.clone(), e.held_out.clone()))
            .collect(),
        plan.eval_sets
            .iter()
            .map(|e| (e.name.clone(), e.query_ids.clone()))
            .collect(),
        cells,
    )?;
    matrix.missing = missing;
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{leave_one_out_plan, Cluster, ShiftManifest};

    fn fixture() -> (ExperimentPlan, QrelSet) {
        let mut m = ShiftManifest::new("topic", 0);
        for (name, test) in [("A", ["a1", "a2"]), ("B", ["b1", "b2"])] {
            m.clusters.push(Cluster {
                name: name.into(),
                train: vec![format!("{name}t")],
                test: test.iter().map(|s| s.to_string()).collect(),
            });
        }
        let mut qrels = QrelSet::new();
        for q in ["a1", "a2", "b1", "b2"] {
            qrels.insert(q, &format!("d_{q}"), 1).unwrap();
        }
        (leave_one_out_plan(&m).unwrap(), qrels)
    }

    fn run(with: &[(&str, &[&str])]) -> RunSet {
        let mut r = RunSet::new("t");
        for (q, docs) in with {
            let n = docs.len();
            r.insert_ranking(
                q,
                docs.iter()
                    .enumerate()
                    .map(|(i, d)| (d.to_string(), (n - i) as f64)),
            )
            .unwrap();
        }
        r
    }

    #[test]
    fn identical_runs_give_identical_rows() {
        let (plan, qrels) = fixture();
        let r = run(&[
            ("a1", &["x", "d_a1"]),
            ("a2", &["d_a2"]),
            ("b1", &["d_b1"]),
            ("b2", &["x", "y", "d_b2"]),
        ]);
        let runs: BTreeMap<_, _> =
            [("not_A".to_string(), r.clone()), ("not_B".to_string(), r)].into();
        let m = build_matrix(&plan, &runs, &qrels, Metric::default(), 1).unwrap();
        assert_eq!(m.rows(), ["not_A", "not_B"]);
        assert_eq!(m.cell(0, 0), [0.5, 1.0]);
        assert_eq!(m.cell(0, 1), [1.0, 1.0 / 3.0]);
        for j in 0..2 {
            assert_eq!(m.cell(0, j), m.cell(1, j));
        }
        assert!(m.missing().is_empty());
        assert_eq!(m.zero_shot_row(1), Some(1));
    }

    #[test]
    fn missing_query_scores_worst_and_is_flagged() {
        let (plan, qrels) = fixture();
        let r = run(&[("a1", &["d_a1"]), ("b1", &["d_b1"]), ("b2", &["d_b2"])]);
        let runs: BTreeMap<_, _> =
            [("not_A".to_string(), r.clone()), ("not_B".to_string(), r)].into();
        let m = build_matrix(&plan, &runs, &qrels, Metric::default(), 1).unwrap();
        assert_eq!(m.cell(0, 0), [1.0, 0.0]);
        assert_eq!(m.missing().len(), 2);
        assert_eq!(m.missing()[0].query_id, "a2");
        let asl = build_matrix(&plan, &runs, &qrels, Metric::Asl { bound: 100 }, 1).unwrap();
        assert_eq!(asl.cell(1, 0), [0.0, 100.0]);
    }

    #[test]
    fn errors() {
        let (plan, mut qrels) = fixture();
        let r = run(&[]);
        let only_a: BTreeMap<_, _> = [("not_A".to_string(), r.clone())].into();
        assert!(matches!(
            build_matrix(&plan, &only_a, &qrels, Metric::default(), 1),
            Err(HarnessError::MissingRun(n)) if n == "not_B"
        ));
        let both: BTreeMap<_, _> =
            [("not_A".to_string(), r.clone()), ("not_B".to_string(), r)].into();
        assert!(matches!(
            build_matrix(&plan, &both, &qrels, Metric::default(), 2),
            Err(HarnessError::MissingQrels(q)) if q == "a1"
        ));
        qrels.insert("zz", "d", 1).unwrap();
        assert!(build_matrix(&plan, &both, &qrels, Metric::default(), 1).is_ok());
    }

    #[test]
    fn long_form_round_trip() {
        let (plan, qrels) = fixture();
        let r1 = run(&[("a1", &["x", "d_a1"]), ("b2", &["d_b2"])]);
        let r2 = run(&[("a2", &["d_a2"]), ("b1", &["x", "y", "z", "d_b1"])]);
        let runs: BTreeMap<_, _> = [("not_A".to_string(), r1), ("not_B".to_string(), r2)].into();
        let m = build_matrix(&plan, &runs, &qrels, Metric::default(), 1).unwrap();
        let text = m.to_long_tsv();
        let back = EvalMatrix::from_long_tsv(&plan, Metric::default(), &text).unwrap();
        assert_eq!(back.to_long_tsv(), text);
        assert!(back.missing().is_empty());
        assert_eq!(m.missing_tsv().lines().count(), 5);

        let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            EvalMatrix::from_long_tsv(&plan, Metric::default(), &truncated),
            Err(HarnessError::Shape(_))
        ));
        let dup = format!("{text}not_A\tA\ta1\t0\n");
        assert!(matches!(
            EvalMatrix::from_long_tsv(&plan, Metric::default(), &dup),
            Err(HarnessError::MalformedLine { .. })
        ));
    }
}
