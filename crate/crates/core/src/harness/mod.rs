//! Experiment orchestration: presets and configuration files, repeated
//! sessions with confidence intervals, the attack-fraction sweep, the exact
//! Table I check, reports and the self-test.

mod config;
mod experiment;
mod report;
mod selftest;
mod stats;
mod sweep;
mod table1;

pub use config::{
    preset_names, ConfigOverlay, ExperimentConfig, FractionSpec, PlannedTag, ReportFormat, StrategyKind, StrategySpec,
};
pub use experiment::{repetition_seed, run_experiment, session_tally, Rate, SessionReport};
pub use report::{render, render_csv, render_json, report_write, ReportFile, CSV_COLUMNS, REPORT_SCHEMA_VERSION};
pub use selftest::{qcore_invariants, random_state, selftest, SelftestCheck, SelftestReport};
pub use stats::{wilson, Interval, Z95};
pub use sweep::{sweep_pe, SkippedPoint, SweepPoint, SweepResult, EFFICIENCY_PIN, PE_TOLERANCE};
pub use table1::{
    collapse_formula, swapped_bob_state, verify_table1, Table1Cell, Table1Result, COLUMNS, EXPECTED, ROWS,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::protocol::ProtocolError;
use crate::qcore::QcoreError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("cannot parse {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("report: {0}")]
    Report(String),
    #[error("{0}")]
    Assertion(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Whether the error stems from the user's configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            HarnessError::Config { .. }
                | HarnessError::Parse { .. }
                | HarnessError::UnknownPreset(_)
                | HarnessError::Protocol(ProtocolError::Config { .. })
        )
    }
}

impl From<QcoreError> for HarnessError {
    fn from(e: QcoreError) -> Self {
        HarnessError::Protocol(ProtocolError::Quantum(e))
    }
}
