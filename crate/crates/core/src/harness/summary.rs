use serde::{Deserialize, Serialize};

use super::{EvalMatrix, HarnessError};
use crate::metrics::{paired_t_test, TTestResult};
use crate::scalar::mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMean {
    pub train_set: String,
    pub mean: f64,
}

/// Avg In / Out / Rel Loss for one eval set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSummary {
    pub eval_set: String,
    pub avg_in: f64,
    pub out: f64,
    /// Fraction, not percent.
    pub rel_loss: f64,
    /// Per-query in-domain mean paired against the zero-shot value.
    pub t_test: TTestResult<f64>,
    /// Mean of every row's cell in this column, in row order.
    pub cell_means: Vec<CellMean>,
    pub query_count: usize,
    /// Queries scored with the worst value because some run lacked them.
    pub missing_count: usize,
}

/// One column reduced to in-domain and zero-shot aggregates, optionally
/// restricted to a subset of its queries.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnAggregate {
    pub avg_in: f64,
    pub out: f64,
    /// `None` when `avg_in` is zero.
    pub rel_loss: Option<f64>,
    pub cell_means: Vec<f64>,
    /// Per query: mean over in-domain rows.
    pub query_in: Vec<f64>,
    /// Per query: zero-shot value.
    pub query_out: Vec<f64>,
}

/// Aggregates column `col` over the queries at `subset` (all when `None`).
///
/// Avg In weights every in-domain model equally: it is the mean of the
/// in-domain cell means.
pub fn column_aggregate(
    matrix: &EvalMatrix,
    col: usize,
    subset: Option<&[usize]>,
) -> Result<ColumnAggregate, HarnessError> {
    let name = &matrix.cols()[col];
    let diag = matrix
        .zero_shot_row(col)
        .ok_or_else(|| non_square(matrix))?;
    let all: Vec<usize>;
    let picks = match subset {
        Some(s) => s,
        None => {
            all = (0..matrix.query_ids(col).len()).collect();
            &all
        }
    };
    if picks.is_empty() {
        return Err(HarnessError::Shape(format!(
            "no queries selected in {name:?}"
        )));
    }
    let restricted: Vec<Vec<f64>> = (0..matrix.rows().len())
        .map(|i| {
            let cell = matrix.cell(i, col);
            picks.iter().map(|&k| cell[k]).collect()
        })
        .collect();
    let cell_means: Vec<f64> = restricted.iter().map(|c| mean(c).unwrap_or(0.0)).collect();
    let in_rows: Vec<usize> = (0..restricted.len()).filter(|&i| i != diag).collect();
    if in_rows.is_empty() {
        return Err(non_square(matrix));
    }
    let in_means: Vec<f64> = in_rows.iter().map(|&i| cell_means[i]).collect();
    let avg_in = mean(&in_means).unwrap_or(0.0);
    let out = cell_means[diag];
    let query_in: Vec<f64> = (0..picks.len())
        .map(|k| {
            let vals: Vec<f64> = in_rows.iter().map(|&i| restricted[i][k]).collect();
            mean(&vals).unwrap_or(0.0)
        })
        .collect();
    let rel_loss = (avg_in != 0.0).then(|| (avg_in - out) / avg_in);
    Ok(ColumnAggregate {
        avg_in,
        out,
        rel_loss,
        cell_means,
        query_in,
        query_out: restricted[diag].clone(),
    })
}

fn non_square(matrix: &EvalMatrix) -> HarnessError {
    HarnessError::NonSquareMatrix {
        rows: matrix.held_out().to_vec(),
        cols: matrix.cols().to_vec(),
    }
}

/// One summary per column, in column order. Requires row `i` to hold out
/// column `i`.
pub fn summarize(matrix: &EvalMatrix) -> Result<Vec<ShiftSummary>, HarnessError> {
    if matrix.held_out() != matrix.cols() {
        return Err(non_square(matrix));
    }
    (0..matrix.cols().len())
        .map(|j| {
            let name = &matrix.cols()[j];
            let agg = column_aggregate(matrix, j, None)?;
            let rel_loss = agg
                .rel_loss
                .ok_or_else(|| HarnessError::ZeroAvgIn(name.clone()))?;
            let t_test = paired_t_test(&agg.query_in, &agg.query_out)?;
            Ok(ShiftSummary {
                eval_set: name.clone(),
                avg_in: agg.avg_in,
                out: agg.out,
                rel_loss,
                t_test,
                cell_means: matrix
                    .rows()
                    .iter()
                    .zip(&agg.cell_means)
                    .map(|(r, &m)| CellMean {
                        train_set: r.clone(),
                        mean: m,
                    })
                    .collect(),
                query_count: matrix.query_ids(j).len(),
                missing_count: matrix
                    .missing()
                    .iter()
                    .filter(|m| m.eval_set == *name)
                    .count(),
            })
        })
        .collect()
}
