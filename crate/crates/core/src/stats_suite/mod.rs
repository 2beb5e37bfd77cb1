//! Descriptive statistics and the two validation tests: Mann-Whitney U on
//! waiting-time samples and a variance comparison expressed as a percentage
//! difference. Also histogram binning for frequency plots.

mod describe;
mod histogram;
mod mann_whitney;
mod variance;

pub use describe::{describe, mean, median, sample_variance, Descriptive};
pub use histogram::{bin_index, histogram, histogram_over, write_histogram_csv, Bin};
pub use mann_whitney::{mann_whitney_u, mann_whitney_u_with, MannWhitneyResult, TestMethod, EXACT_MAX_POOLED};
pub use variance::{compare_variances, variance_comparison, VarianceComparison, VarianceVerdict};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample `{0}` is empty")]
    EmptySample(String),
    #[error("variance of `{0}` is undefined for fewer than two values")]
    VarianceUndefined(String),
    #[error("sample `{label}` has a non-finite value at index {index}")]
    NonFiniteValue { label: String, index: usize },
    #[error("significance level {0} is outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("bin width {0} must be positive and finite")]
    InvalidBinWidth(f64),
    #[error("reference variance is zero")]
    ZeroReferenceVariance,
}

/// Labelled list of finite observations (minutes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self, StatsError> {
        let label = label.into();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFiniteValue { label, index });
        }
        Ok(Sample { label, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
