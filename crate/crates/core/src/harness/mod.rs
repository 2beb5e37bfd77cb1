//! Experiment orchestration: configuration and reference-data loading,
//! replication batches, validation against a reference sample, calibration
//! and report emission.

mod calibrate;
mod config;
mod experiment;
mod reference;
mod report;

pub use calibrate::{calibrate, CalibrationOutcome, CalibrationSettings, CalibrationTargets};
pub use config::{load_config, ComparisonUnit, ExperimentSpec};
pub use experiment::{
    replication_seeds, run_batch, run_experiment, run_experiment_with_reference, ExperimentReport,
    ParadigmReport, ParadigmValidation, Provenance, ReferenceSummary,
};
pub use reference::{load_reference_sample, synthetic_reference, synthetic_reference_seeds};
pub use report::{emit_report, load_report, write_table_csv, ReportFormat};

use thiserror::Error;

use crate::fitting_room::{FittingError, Paradigm};
use crate::stats_suite::StatsError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("{path}, data row {row}: negative waiting time {value}")]
    NegativeWaitingTime { path: String, row: usize, value: f64 },
    #[error("{paradigm:?} replication {index}: {source}")]
    Replication {
        paradigm: Paradigm,
        index: usize,
        #[source]
        source: FittingError,
    },
    #[error(transparent)]
    Scenario(#[from] FittingError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("calibration failed: {reason}")]
    CalibrationFailed {
        reason: String,
        best: Option<Box<CalibrationOutcome>>,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
