//! Report persistence: canonical JSON, a metrics CSV, and a telemetry
//! side-file.
//!
//! `report.json` and `report.csv` are deterministic for a given run (no
//! timing data). Wall-clock latencies go to `telemetry.json` only, so two
//! identical runs produce byte-identical reports.

use super::RunReport;
use crate::error::Result;
use std::path::Path;

/// Writes `report.json`, `report.csv` and `telemetry.json` into `dir`,
/// creating it if needed. The report is validated first.
pub fn write_report(dir: impl AsRef<Path>, report: &RunReport) -> Result<()> {
    report.validate()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(dir.join("report.json"), json)?;
    std::fs::write(dir.join("report.csv"), render_csv(report))?;
    let mut telemetry = serde_json::to_string_pretty(&telemetry(report))?;
    telemetry.push('\n');
    std::fs::write(dir.join("telemetry.json"), telemetry)?;
    Ok(())
}

/// Reads a `report.json` back.
pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let report: RunReport = serde_json::from_str(&text)?;
    report.validate()?;
    Ok(report)
}

/// The metrics table as CSV: one row overall, one per difficulty tier.
pub fn render_csv(report: &RunReport) -> String {
    let mut csv = String::from("group,queries,HR@10,NDCG@10,SR\n");
    let mut push = |group: &str, row: &super::MetricRow| {
        csv.push_str(&format!(
            "{group},{},{:.4},{:.4},{:.4}\n",
            row.queries, row.hr_at_10, row.ndcg_at_10, row.sr
        ));
    };
    push("overall", &report.overall);
    for (difficulty, row) in &report.per_difficulty {
        push(difficulty.name(), row);
    }
    csv
}

/// Per-query wall-clock and token usage. Only meaningful for a report still
/// in memory — latencies are not persisted in `report.json`.
fn telemetry(report: &RunReport) -> serde_json::Value {
    let queries: Vec<serde_json::Value> = report
        .outcomes
        .iter()
        .map(|o| {
            serde_json::json!({
                "index": o.index,
                "latency_micros": o.latency_micros,
                "calls": o.tokens.calls,
                "prompt_tokens": o.tokens.prompt_tokens,
                "completion_tokens": o.tokens.completion_tokens,
            })
        })
        .collect();
    let total: u64 = report.outcomes.iter().map(|o| o.latency_micros).sum();
    serde_json::json!({ "total_latency_micros": total, "queries": queries })
}
