use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One result row: a (model, method, density, noise) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub method: String,
    pub density: usize,
    pub noise: f64,
    /// Gaussian-curvature errors against ground truth, when available.
    pub max_abs_err: Option<f64>,
    pub mean_abs_err: Option<f64>,
    /// Absent only on failed rows.
    pub euler_estimate: Option<f64>,
    pub genus: Option<i64>,
    pub wall_time_s: f64,
    /// Mean-curvature errors, when both ground truth and the estimate exist.
    pub max_abs_err_h: Option<f64>,
    pub mean_abs_err_h: Option<f64>,
    pub repeats: usize,
    pub euler_std: Option<f64>,
    /// `ok`, or the error message of a failed row.
    pub status: String,
}

pub const REPORT_COLUMNS: [&str; 14] = [
    "model",
    "method",
    "density",
    "noise",
    "max_abs_err",
    "mean_abs_err",
    "euler_estimate",
    "genus",
    "wall_time_s",
    "max_abs_err_h",
    "mean_abs_err_h",
    "repeats",
    "euler_std",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: &'a [ReportRow],
}

pub fn report_to_string(rows: &[ReportRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS)
                .map_err(|e| Error::Report(e.to_string()))?;
            for row in rows {
                w.serialize(row).map_err(|e| Error::Report(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
        }
        ReportFormat::Json => serde_json::to_string_pretty(&JsonReport { rows })
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Report(e.to_string())),
    }
}

pub fn write_report(rows: &[ReportRow], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = report_to_string(rows, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
