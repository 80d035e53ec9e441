use serde::{Deserialize, Serialize};

use super::{regularized_incomplete_beta, MetricError};
use crate::scalar::{CompensatedSum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TTestResult<T> {
    /// `±inf` when the differences are constant and non-zero.
    #[serde(with = "crate::serde_float")]
    pub t_statistic: T,
    pub degrees_of_freedom: usize,
    #[serde(with = "crate::serde_float")]
    pub p_value: T,
    #[serde(with = "crate::serde_float")]
    pub mean_difference: T,
}

/// Two-sided p-value of Student's t with `dof` degrees of freedom:
/// `I_{dof/(dof+t²)}(dof/2, 1/2)`.
pub fn student_t_two_sided_p<T: Scalar>(t: T, dof: usize) -> Result<T, MetricError> {
    if dof == 0 {
        return Err(MetricError::InvalidParameter("dof must be positive".into()));
    }
    if t.is_nan() {
        return Err(MetricError::InvalidParameter("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(T::zero());
    }
    let nu = T::from_usize_lossy(dof);
    let x = nu / (nu + t * t);
    let p = regularized_incomplete_beta(nu / T::lit(2.0), T::lit(0.5), x)?;
    Ok(p.max(T::zero()).min(T::one()))
}

/// Paired two-sided t-test on `a[i] - b[i]`.
pub fn paired_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<TTestResult<T>, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples(n));
    }
    let diffs: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let dof = n - 1;
    if diffs.iter().all(|&d| d == diffs[0]) {
        let d = diffs[0];
        let (t, p) = if d == T::zero() {
            (T::zero(), T::one())
        } else {
            (d.signum() * T::infinity(), T::zero())
        };
        return Ok(TTestResult {
            t_statistic: t,
            degrees_of_freedom: dof,
            p_value: p,
            mean_difference: d,
        });
    }
    let count = T::from_usize_lossy(n);
    let mean = diffs.iter().copied().collect::<CompensatedSum<T>>().value() / count;
    let ss = diffs
        .iter()
        .map(|&d| (d - mean) * (d - mean))
        .collect::<CompensatedSum<T>>()
        .value();
    let sd = (ss / T::from_usize_lossy(dof)).sqrt();
    let t = mean / (sd / count.sqrt());
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: dof,
        p_value: student_t_two_sided_p(t, dof)?,
        mean_difference: mean,
    })
}
