use serde::{Deserialize, Serialize};

use super::{Sample, StatsError};

/// Summary row in the shape of a results table: mean, median, sample
/// standard deviation and variance (n - 1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub variance: f64,
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Two-pass sample variance.
pub fn sample_variance(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some(ss / (values.len() - 1) as f64)
}

pub fn describe(sample: &Sample) -> Result<Descriptive, StatsError> {
    let v = &sample.values;
    let mean = mean(v).ok_or_else(|| StatsError::EmptySample(sample.label.clone()))?;
    let variance =
        sample_variance(v).ok_or_else(|| StatsError::VarianceUndefined(sample.label.clone()))?;
    Ok(Descriptive {
        n: v.len(),
        mean,
        median: median(v).unwrap_or(mean),
        std_dev: variance.sqrt(),
        variance,
    })
}
