use serde::{Deserialize, Serialize};

use super::{describe::sample_variance, Sample, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceVerdict {
    Similar,
    Different,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceComparison {
    pub variance_model: f64,
    pub variance_reference: f64,
    /// |model - reference| / reference * 100
    pub percent_difference: f64,
    pub similarity_threshold: f64,
    pub verdict: VarianceVerdict,
}

/// Compares two already-computed variances. The verdict is `Similar` iff the
/// percentage difference is at most `threshold_percent`.
pub fn compare_variances(
    variance_model: f64,
    variance_reference: f64,
    threshold_percent: f64,
) -> Result<VarianceComparison, StatsError> {
    if variance_reference == 0.0 {
        return Err(StatsError::ZeroReferenceVariance);
    }
    let percent_difference =
        (variance_model - variance_reference).abs() / variance_reference * 100.0;
    let verdict = if percent_difference <= threshold_percent {
        VarianceVerdict::Similar
    } else {
        VarianceVerdict::Different
    };
    Ok(VarianceComparison {
        variance_model,
        variance_reference,
        percent_difference,
        similarity_threshold: threshold_percent,
        verdict,
    })
}

pub fn variance_comparison(
    model: &Sample,
    reference: &Sample,
    threshold_percent: f64,
) -> Result<VarianceComparison, StatsError> {
    let vm = sample_variance(&model.values)
        .ok_or_else(|| StatsError::VarianceUndefined(model.label.clone()))?;
    let vr = sample_variance(&reference.values)
        .ok_or_else(|| StatsError::VarianceUndefined(reference.label.clone()))?;
    compare_variances(vm, vr, threshold_percent)
}
