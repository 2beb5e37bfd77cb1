//! Closed-form M/M/1 results, the analytical ground truth for the
//! simulation kernels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitting_room::ReplicationResult;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("utilisation rho = {rho} >= 1 has no steady state")]
    UnstableSystem { rho: f64 },
    #[error("invalid rates: lambda = {lambda}, mu = {mu}")]
    InvalidRates { lambda: f64, mu: f64 },
    #[error("replication has no completed customers")]
    InsufficientData,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MM1Params {
    /// Arrival rate, customers per minute.
    pub lambda: f64,
    /// Service rate, customers per minute.
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MM1Metrics {
    pub rho: f64,
    /// Mean wait in queue.
    pub wq: f64,
    /// Mean time in system.
    pub w: f64,
    /// Mean number waiting.
    pub lq: f64,
    /// Mean number in system.
    pub l: f64,
}

pub fn mm1_metrics(p: MM1Params) -> Result<MM1Metrics, OracleError> {
    let MM1Params { lambda, mu } = p;
    if !(mu.is_finite() && mu > 0.0 && lambda.is_finite() && lambda >= 0.0) {
        return Err(OracleError::InvalidRates { lambda, mu });
    }
    let rho = lambda / mu;
    if rho >= 1.0 {
        return Err(OracleError::UnstableSystem { rho });
    }
    let wq = lambda / (mu * (mu - lambda));
    let w = wq + 1.0 / mu;
    Ok(MM1Metrics {
        rho,
        wq,
        w,
        lq: lambda * wq,
        l: lambda * w,
    })
}

/// `|L - lambda * W| / max(L, 1e-12)`.
pub fn littles_law_error(l_observed: f64, lambda: f64, w_observed: f64) -> f64 {
    (l_observed - lambda * w_observed).abs() / l_observed.max(1e-12)
}

/// Little's law on a replication: the time-average number of waiting
/// customers against `lambda_observed` times the mean per-customer wait.
pub fn littles_law_check(result: &ReplicationResult, lambda_observed: f64) -> Result<f64, OracleError> {
    let w = result.mean_total_wait().ok_or(OracleError::InsufficientData)?;
    Ok(littles_law_error(result.time_avg_waiting, lambda_observed, w))
}
