use serde::{Deserialize, Serialize};

use crate::event_core::Distribution;
use crate::fitting_room::{workload_fractions, Paradigm, ScenarioConfig};

use super::experiment::{replication_seeds, run_batch};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Pooled mean of per-customer total waits, minutes.
    pub mean_wait: f64,
    /// Share of staff busy time on jobs 1, 2 and 3.
    pub workload_fractions: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSettings {
    /// Accepted distance from the target mean wait, minutes.
    pub tolerance: f64,
    /// Accepted distance of each achieved workload fraction from its target.
    pub fraction_tolerance: f64,
    pub max_iterations: u32,
    pub replications: u32,
    pub base_seed: u64,
    /// Mean job-1 service time; the other service means are scaled from it.
    pub entry_mean: f64,
    pub help_probability: f64,
    /// Everything not set by calibration (fitting time, staff, horizon, ...).
    pub base: ScenarioConfig,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            tolerance: 0.05,
            fraction_tolerance: 0.03,
            max_iterations: 60,
            replications: 100,
            base_seed: 1,
            entry_mean: crate::fitting_room::DEFAULT_ENTRY_MEAN,
            help_probability: crate::fitting_room::DEFAULT_HELP_PROBABILITY,
            base: ScenarioConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub config: ScenarioConfig,
    pub achieved_mean_wait: f64,
    pub achieved_fractions: [f64; 3],
    pub iterations: u32,
}

fn infeasible(reason: impl Into<String>) -> HarnessError {
    HarnessError::CalibrationFailed {
        reason: reason.into(),
        best: None,
    }
}

/// Service means from the workload split: with every customer visiting jobs
/// 1 and 3 and a fraction `p` visiting job 2, busy time per job is
/// proportional to (E1, p*E2, E3).
fn service_config(targets: &CalibrationTargets, settings: &CalibrationSettings) -> Result<ScenarioConfig, HarnessError> {
    let [f1, f2, f3] = targets.workload_fractions;
    if targets.workload_fractions.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(infeasible("workload fractions must be finite and non-negative"));
    }
    if ((f1 + f2 + f3) - 1.0).abs() > 1e-6 {
        return Err(infeasible(format!("workload fractions sum to {}, not 1", f1 + f2 + f3)));
    }
    if f1 == 0.0 || f3 == 0.0 {
        return Err(infeasible("every customer is served on jobs 1 and 3, so their shares must be positive"));
    }
    let p = settings.help_probability;
    if !(0.0..=1.0).contains(&p) {
        return Err(infeasible(format!("help probability {p} is outside [0, 1]")));
    }
    if (p > 0.0) != (f2 > 0.0) {
        return Err(infeasible(format!(
            "a job-2 share of {f2} cannot arise with help probability {p}"
        )));
    }
    if !(settings.entry_mean.is_finite() && settings.entry_mean > 0.0) {
        return Err(infeasible("entry service mean must be positive"));
    }

    let per_garment = settings.base.per_garment_minutes.unwrap_or(0.0) * settings.base.garment_count.mean();
    let e1 = settings.entry_mean + per_garment;
    let return_mean = e1 * f3 / f1 - per_garment;
    if return_mean < 0.0 {
        return Err(infeasible("per-garment handling alone exceeds the job-3 share"));
    }
    let help_mean = if p > 0.0 { e1 * f2 / (f1 * p) } else { settings.base.help_service.mean() };
    Ok(ScenarioConfig {
        entry_service: Distribution::exponential_mean(settings.entry_mean),
        help_service: Distribution::exponential_mean(help_mean),
        return_service: Distribution::exponential_mean(return_mean),
        help_probability: p,
        interarrival: None,
        ..settings.base.clone()
    })
}

struct Evaluation {
    mean_wait: f64,
    fractions: [f64; 3],
}

fn evaluate(config: &ScenarioConfig, seeds: &[u64]) -> Result<Evaluation, HarnessError> {
    let results = run_batch(Paradigm::Des, config, seeds)?;
    let waits: Vec<f64> = results
        .iter()
        .flat_map(|r| r.waiting_time_sample.iter().copied())
        .collect();
    let fractions: Vec<[f64; 3]> = results.iter().filter_map(|r| workload_fractions(r).ok()).collect();
    let mut mean_fr = [0.0; 3];
    for f in &fractions {
        for j in 0..3 {
            mean_fr[j] += f[j] / fractions.len().max(1) as f64;
        }
    }
    Ok(Evaluation {
        mean_wait: crate::stats_suite::mean(&waits).unwrap_or(0.0),
        fractions: mean_fr,
    })
}

/// Fixes the service means and help probability from the workload split,
/// then bisects the arrival rate until the replication-pooled mean wait is
/// within tolerance of the target.
pub fn calibrate(
    targets: &CalibrationTargets,
    settings: &CalibrationSettings,
) -> Result<CalibrationOutcome, HarnessError> {
    if !(targets.mean_wait.is_finite() && targets.mean_wait > 0.0) {
        return Err(infeasible(format!(
            "target mean wait {} is not positive; any arrivals with positive service times queue",
            targets.mean_wait
        )));
    }
    if settings.replications == 0 {
        return Err(infeasible("at least one replication per evaluation is required"));
    }
    let mut config = service_config(targets, settings)?;
    config.validate()?;

    let capacity = config.staff_count as f64 / config.expected_service_by_job().iter().sum::<f64>();
    let seeds = replication_seeds(settings.base_seed, settings.replications);
    let mut lo = 0.0;
    let mut hi = 0.999 * capacity;
    let mut best: Option<CalibrationOutcome> = None;

    for iteration in 1..=settings.max_iterations {
        config.arrival_rate = if iteration == 1 { hi } else { 0.5 * (lo + hi) };
        let eval = evaluate(&config, &seeds)?;
        log::debug!(
            "calibration step {iteration}: arrival rate {:.6} -> mean wait {:.4}",
            config.arrival_rate,
            eval.mean_wait
        );
        let candidate = CalibrationOutcome {
            config: config.clone(),
            achieved_mean_wait: eval.mean_wait,
            achieved_fractions: eval.fractions,
            iterations: iteration,
        };
        let miss = (eval.mean_wait - targets.mean_wait).abs();
        if best
            .as_ref()
            .is_none_or(|b| miss < (b.achieved_mean_wait - targets.mean_wait).abs())
        {
            best = Some(candidate.clone());
        }
        if iteration == 1 && eval.mean_wait < targets.mean_wait - settings.tolerance {
            return Err(HarnessError::CalibrationFailed {
                reason: format!(
                    "even near saturation the mean wait is only {:.4} min",
                    eval.mean_wait
                ),
                best: best.map(Box::new),
            });
        }
        if miss <= settings.tolerance {
            let off = candidate
                .achieved_fractions
                .iter()
                .zip(targets.workload_fractions)
                .any(|(a, t)| (a - t).abs() > settings.fraction_tolerance);
            if off {
                return Err(HarnessError::CalibrationFailed {
                    reason: format!(
                        "mean wait matched but workload fractions {:?} miss {:?}",
                        candidate.achieved_fractions, targets.workload_fractions
                    ),
                    best: Some(Box::new(candidate)),
                });
            }
            return Ok(candidate);
        }
        if eval.mean_wait > targets.mean_wait {
            hi = config.arrival_rate;
        } else {
            lo = config.arrival_rate;
        }
    }
    Err(HarnessError::CalibrationFailed {
        reason: format!("no rate within tolerance after {} iterations", settings.max_iterations),
        best: best.map(Box::new),
    })
}
