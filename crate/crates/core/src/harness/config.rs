use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fitting_room::{FittingError, Paradigm, ScenarioConfig};

use super::HarnessError;

/// What one observation in the compared samples stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonUnit {
    /// Every completed customer's wait, pooled over replications.
    #[default]
    Customer,
    /// One mean wait per replication (per day).
    Replication,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub replications: u32,
    pub base_seed: u64,
    pub paradigms: Vec<Paradigm>,
    /// CSV with a `total_wait` column. Relative paths resolve against the
    /// config file's directory.
    pub reference_sample_path: Option<PathBuf>,
    /// Simulate the reference from held-out seeds instead of reading a file.
    pub synthetic_reference: bool,
    pub synthetic_reference_days: u32,
    pub alpha: f64,
    pub variance_threshold_percent: f64,
    pub comparison_unit: ComparisonUnit,
    pub histogram_bin_width: f64,
    /// Worker threads for replications; all processors when absent.
    pub threads: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            scenario: ScenarioConfig::default(),
            replications: 100,
            base_seed: 1,
            paradigms: vec![Paradigm::Des, Paradigm::Abs],
            reference_sample_path: None,
            synthetic_reference: false,
            synthetic_reference_days: 1,
            alpha: 0.05,
            variance_threshold_percent: 10.0,
            comparison_unit: ComparisonUnit::Customer,
            histogram_bin_width: 0.5,
            threads: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |field: &str, reason: &str| {
            Err(HarnessError::Validation {
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        if self.replications == 0 {
            return bad("replications", "at least one replication is required");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha", "must lie strictly between 0 and 1");
        }
        if self.paradigms.is_empty() {
            return bad("paradigms", "name at least one of DES, ABS");
        }
        if self.paradigms.len() == 2 && self.paradigms[0] == self.paradigms[1] || self.paradigms.len() > 2 {
            return bad("paradigms", "each paradigm may appear once");
        }
        if !(self.variance_threshold_percent.is_finite() && self.variance_threshold_percent >= 0.0) {
            return bad("variance_threshold_percent", "must be a finite percentage >= 0");
        }
        if !(self.histogram_bin_width.is_finite() && self.histogram_bin_width > 0.0) {
            return bad("histogram_bin_width", "must be positive");
        }
        if self.synthetic_reference && self.synthetic_reference_days == 0 {
            return bad("synthetic_reference_days", "at least one day is required");
        }
        if self.synthetic_reference && self.reference_sample_path.is_some() {
            return bad("synthetic_reference", "cannot be combined with reference_sample_path");
        }
        if self.threads == Some(0) {
            return bad("threads", "must be positive");
        }
        self.scenario.validate().map_err(|e| match e {
            FittingError::InvalidConfig { field, reason } => HarnessError::Validation {
                field: format!("scenario.{field}"),
                reason,
            },
            other => other.into(),
        })
    }
}

/// Reads a JSON experiment file, fills defaults and checks every field.
pub fn load_config(path: &Path) -> Result<ExperimentSpec, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if let Some(p) = &spec.reference_sample_path {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                spec.reference_sample_path = Some(dir.join(p));
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}
