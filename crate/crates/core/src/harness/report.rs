//! Machine-readable reports: CSV with a fixed column set, or versioned JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ReportFormat;
use super::experiment::SessionReport;
use super::HarnessError;

/// Bumped whenever the JSON layout changes incompatibly.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 14] = [
    "scenario",
    "eta",
    "eta_prime",
    "rounds",
    "error_rate",
    "error_ci_lo",
    "error_ci_hi",
    "eff_bob",
    "eff_charlie",
    "sift_rate",
    "attacked_fraction",
    "ka_acc",
    "kc_acc",
    "verdict",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub generator: String,
    pub reports: Vec<SessionReport>,
}

impl ReportFile {
    pub fn new(reports: Vec<SessionReport>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            generator: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            reports,
        }
    }
}

fn csv_row(r: &SessionReport) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        r.scenario.clone(),
        r.eta.to_string(),
        r.eta_prime.to_string(),
        (r.rounds * u64::from(r.repetitions)).to_string(),
        r.error_rate.value.to_string(),
        r.error_rate.ci.lo.to_string(),
        r.error_rate.ci.hi.to_string(),
        r.eff_bob.value.to_string(),
        r.eff_charlie.value.to_string(),
        r.sift_rate.value.to_string(),
        r.attacked_fraction.value.to_string(),
        opt(r.ka_acc),
        opt(r.kc_acc),
        r.verdict.to_string(),
    ]
}

pub fn render_csv(reports: &[SessionReport]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.write_record(csv_row(r))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Report(e.to_string()))
}

pub fn render_json(reports: &[SessionReport]) -> Result<String, HarnessError> {
    let mut s = serde_json::to_string_pretty(&ReportFile::new(reports.to_vec()))?;
    s.push('\n');
    Ok(s)
}

pub fn render(reports: &[SessionReport], format: ReportFormat) -> Result<String, HarnessError> {
    match format {
        ReportFormat::Csv => render_csv(reports),
        ReportFormat::Json => render_json(reports),
    }
}

pub fn report_write(reports: &[SessionReport], format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    let text = render(reports, format)?;
    std::fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_is_header_only() {
        let s = render_csv(&[]).unwrap();
        assert_eq!(s, format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn io_failure_is_structured() {
        let err = report_write(&[], ReportFormat::Csv, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, HarnessError::Io { .. }));
    }
}
