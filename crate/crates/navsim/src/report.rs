//! `report.json` and the plain-text summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use navsim_core::eval::EvalReport;

use crate::error::Result;

pub fn to_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

pub fn from_json(s: &str) -> Result<EvalReport> {
    Ok(serde_json::from_str(s)?)
}

pub fn write_json(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(report))?;
    Ok(())
}

/// One table row: accuracy as a whole percentage and the mean episode
/// length over all episodes.
pub fn table_row(label: &str, report: &EvalReport) -> String {
    format!("{label} | {:.0}% | {:.0} steps", report.accuracy * 100.0, report.avg_steps_all)
}

pub fn text_table(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = String::from("Map | Accuracy | Average Time\n");
    for (label, report) in rows {
        writeln!(out, "{}", table_row(label, report)).unwrap();
    }
    out
}
