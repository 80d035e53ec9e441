use serde::{Deserialize, Serialize};

use super::{HarnessError, ShiftSummary};
use crate::metrics::Metric;

/// The JSON form of a set of summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    pub summaries: Vec<ShiftSummary>,
}

type RowFormat = fn(&ShiftSummary) -> String;

/// Table layout: one column per eval set, rows `AvgIn`, `Out`, `RelLoss`, `p`.
/// Rel Loss is a percentage with one decimal. An empty list yields the header
/// line only.
pub fn summary_csv(summaries: &[ShiftSummary]) -> String {
    let mut header = vec!["row".to_string()];
    header.extend(summaries.iter().map(|s| s.eval_set.clone()));
    let mut out = header.join(",") + "\n";
    if summaries.is_empty() {
        return out;
    }
    let rows: [(&str, RowFormat); 4] = [
        ("AvgIn", |s| format!("{:.4}", s.avg_in)),
        ("Out", |s| format!("{:.4}", s.out)),
        ("RelLoss", |s| format!("{:.1}%", s.rel_loss * 100.0)),
        ("p", |s| format!("{:.3e}", s.t_test.p_value)),
    ];
    for (label, render) in rows {
        let mut line = vec![label.to_string()];
        line.extend(summaries.iter().map(render));
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_json(report: &SummaryReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("summaries always serialize");
    s.push('\n');
    s
}

pub fn load_summary_json(text: &str) -> Result<SummaryReport, HarnessError> {
    Ok(serde_json::from_str(text)?)
}
