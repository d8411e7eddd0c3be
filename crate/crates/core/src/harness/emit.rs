use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::sweep::{SweepResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 7] = [
    "axis_value",
    "algorithm",
    "architecture",
    "mean_ee_bits_per_joule",
    "std_ee",
    "feasible_drops",
    "total_drops",
];

/// Nine significant digits in scientific notation.
pub fn sig9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else {
        "NaN".to_string()
    }
}

fn round9(x: f64) -> f64 {
    if x.is_finite() {
        sig9(x).parse().unwrap_or(x)
    } else {
        x
    }
}

fn rounded_row(r: &SweepRow) -> SweepRow {
    SweepRow {
        axis_value: round9(r.axis_value),
        mean_ee_bits_per_joule: round9(r.mean_ee_bits_per_joule),
        std_ee: round9(r.std_ee),
        mean_se_bits_per_hz: round9(r.mean_se_bits_per_hz),
        mean_dual_iterations: round9(r.mean_dual_iterations),
        paired_mean_ee_bits_per_joule: round9(r.paired_mean_ee_bits_per_joule),
        ..r.clone()
    }
}

pub fn csv_string(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in &result.rows {
        w.write_record([
            sig9(r.axis_value),
            r.algorithm.as_str().to_string(),
            r.architecture.as_str().to_string(),
            sig9(r.mean_ee_bits_per_joule),
            sig9(r.std_ee),
            r.feasible_drops.to_string(),
            r.total_drops.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Full result with provenance; every float rounded to nine significant
/// digits. Non-finite means (no feasible drop) become `null`.
pub fn json_string(result: &SweepResult) -> Result<String> {
    let rounded = SweepResult {
        rows: result.rows.iter().map(rounded_row).collect(),
        drops: result
            .drops
            .iter()
            .map(|d| {
                let mut d = d.clone();
                d.axis_value = round9(d.axis_value);
                d.ee_bits_per_joule = round9(d.ee_bits_per_joule);
                d.se_bits_per_hz = round9(d.se_bits_per_hz);
                d.total_power_w = round9(d.total_power_w);
                d
            })
            .collect(),
        ..result.clone()
    };
    serde_json::to_string_pretty(&rounded).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_json(s: &str) -> Result<SweepResult> {
    serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))
}

/// Writes the result to `path` in the requested format.
pub fn emit_results(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => csv_string(result)?,
        OutputFormat::Json => json_string(result)?,
    };
    std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
