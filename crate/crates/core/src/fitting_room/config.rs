use serde::{Deserialize, Serialize};

use crate::event_core::{CountDistribution, Distribution};

use super::FittingError;

/// What happens to customers still inside when the doors close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosePolicy {
    /// Arrivals stop at the horizon; everyone inside is served to completion.
    #[default]
    FinishInSystem,
    /// The run stops at the horizon; customers inside are not sampled.
    HardCut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobSelectionPolicy {
    /// Serve the queue whose head joined earliest; ties go by fixed priority.
    #[default]
    GlobalFifo,
    /// Return, then entry, then help.
    FixedPriority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitingMetric {
    /// One value per completed customer: waits summed over the queues visited.
    #[default]
    PerCustomerTotal,
    /// One value per queue visit.
    PerQueue,
}

/// Arrival rate that brings the default scenario's 100-replication pooled
/// mean wait to 1.68 min (found by `fitroom calibrate`, base seed 1).
pub const CALIBRATED_ARRIVAL_RATE: f64 = 0.19953;
pub const DEFAULT_ENTRY_MEAN: f64 = 1.0;
pub const DEFAULT_RETURN_MEAN: f64 = 1.0;
pub const DEFAULT_HELP_PROBABILITY: f64 = 0.25;
/// Chosen so that p_help * help_mean / entry_mean = 0.10 / 0.45.
pub const DEFAULT_HELP_MEAN: f64 = DEFAULT_ENTRY_MEAN * (0.10 / 0.45) / DEFAULT_HELP_PROBABILITY;
pub const DEFAULT_FITTING_MEAN: f64 = 10.0;
pub const DEFAULT_GARMENT_MEAN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Poisson arrival rate, customers per minute.
    pub arrival_rate: f64,
    /// Replaces the exponential interarrival implied by `arrival_rate`.
    pub interarrival: Option<Distribution>,
    pub entry_service: Distribution,
    pub help_service: Distribution,
    pub return_service: Distribution,
    pub fitting_duration: Distribution,
    pub help_probability: f64,
    pub garment_count: CountDistribution,
    /// Extra minutes per garment on jobs 1 and 3. Off by default.
    pub per_garment_minutes: Option<f64>,
    pub staff_count: u32,
    pub horizon_minutes: f64,
    pub close_policy: ClosePolicy,
    pub job_selection_policy: JobSelectionPolicy,
    pub waiting_metric: WaitingMetric,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            arrival_rate: CALIBRATED_ARRIVAL_RATE,
            interarrival: None,
            entry_service: Distribution::exponential_mean(DEFAULT_ENTRY_MEAN),
            help_service: Distribution::exponential_mean(DEFAULT_HELP_MEAN),
            return_service: Distribution::exponential_mean(DEFAULT_RETURN_MEAN),
            fitting_duration: Distribution::exponential_mean(DEFAULT_FITTING_MEAN),
            help_probability: DEFAULT_HELP_PROBABILITY,
            garment_count: CountDistribution::ShiftedGeometric {
                mean: DEFAULT_GARMENT_MEAN,
            },
            per_garment_minutes: None,
            staff_count: 1,
            horizon_minutes: 480.0,
            close_policy: ClosePolicy::FinishInSystem,
            job_selection_policy: JobSelectionPolicy::GlobalFifo,
            waiting_metric: WaitingMetric::PerCustomerTotal,
        }
    }
}

impl ScenarioConfig {
    /// Single-stage M/M/1 shape: exponential arrivals at `lambda`, job 1
    /// exponential at `mu`, no help, zero fitting and zero job 3. Return
    /// jobs take priority so the zero-length job 3 never queues behind
    /// entry customers.
    pub fn mm1(lambda: f64, mu: f64) -> Self {
        ScenarioConfig {
            arrival_rate: lambda,
            entry_service: Distribution::Exponential { rate: mu },
            fitting_duration: Distribution::Deterministic { value: 0.0 },
            return_service: Distribution::Deterministic { value: 0.0 },
            help_probability: 0.0,
            job_selection_policy: JobSelectionPolicy::FixedPriority,
            ..ScenarioConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), FittingError> {
        let bad = |field: &str, reason: String| {
            Err(FittingError::InvalidConfig {
                field: field.to_string(),
                reason,
            })
        };
        if !(self.arrival_rate.is_finite() && self.arrival_rate >= 0.0) {
            return bad("arrival_rate", format!("{} is not a finite rate >= 0", self.arrival_rate));
        }
        if let Some(d) = &self.interarrival {
            d.validate().or_else(|e| bad("interarrival", e.to_string()))?;
            if d.mean() <= 0.0 {
                return bad("interarrival", "mean interarrival time must be positive".into());
            }
        }
        for (field, d) in [
            ("entry_service", &self.entry_service),
            ("help_service", &self.help_service),
            ("return_service", &self.return_service),
            ("fitting_duration", &self.fitting_duration),
        ] {
            d.validate().or_else(|e| bad(field, e.to_string()))?;
        }
        if !(0.0..=1.0).contains(&self.help_probability) {
            return bad("help_probability", format!("{} is outside [0, 1]", self.help_probability));
        }
        self.garment_count
            .validate()
            .or_else(|e| bad("garment_count", e.to_string()))?;
        if let Some(x) = self.per_garment_minutes {
            if !(x.is_finite() && x >= 0.0) {
                return bad("per_garment_minutes", format!("{x} is not a finite value >= 0"));
            }
        }
        if self.staff_count == 0 {
            return bad("staff_count", "at least one member of staff is required".into());
        }
        if !(self.horizon_minutes.is_finite() && self.horizon_minutes > 0.0) {
            return bad("horizon_minutes", format!("{} is not positive", self.horizon_minutes));
        }
        Ok(())
    }

    /// Long-run arrivals per minute.
    pub fn effective_arrival_rate(&self) -> f64 {
        match &self.interarrival {
            Some(d) => 1.0 / d.mean(),
            None => self.arrival_rate,
        }
    }

    /// Expected staff minutes per customer for jobs 1, 2 and 3.
    pub fn expected_service_by_job(&self) -> [f64; 3] {
        let per_garment = self.per_garment_minutes.unwrap_or(0.0) * self.garment_count.mean();
        [
            self.entry_service.mean() + per_garment,
            self.help_probability * self.help_service.mean(),
            self.return_service.mean() + per_garment,
        ]
    }

    /// Arrival rate times expected service minutes per customer.
    pub fn offered_load(&self) -> f64 {
        self.effective_arrival_rate() * self.expected_service_by_job().iter().sum::<f64>()
    }

    pub fn stability_warning(&self) -> Option<String> {
        let load = self.offered_load();
        (load >= self.staff_count as f64).then(|| {
            format!(
                "offered load {load:.3} is not below staff count {}; queues grow without bound",
                self.staff_count
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_workload_split() {
        let c = ScenarioConfig::default();
        let e = c.expected_service_by_job();
        let total: f64 = e.iter().sum();
        let fr: Vec<f64> = e.iter().map(|x| x / total).collect();
        assert!((fr[0] - 0.45).abs() < 1e-12);
        assert!((fr[1] - 0.10).abs() < 1e-12);
        assert!((fr[2] - 0.45).abs() < 1e-12);
        c.validate().unwrap();
        assert!(c.stability_warning().is_none());
    }

    #[test]
    fn validation_names_field() {
        let c = ScenarioConfig {
            help_probability: 1.5,
            ..Default::default()
        };
        match c.validate() {
            Err(FittingError::InvalidConfig { field, .. }) => assert_eq!(field, "help_probability"),
            other => panic!("{other:?}"),
        }
        let c = ScenarioConfig {
            staff_count: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn overload_warns() {
        let c = ScenarioConfig::mm1(1.2, 1.0);
        assert!(c.stability_warning().is_some());
        assert!(ScenarioConfig::mm1(0.8, 1.0).stability_warning().is_none());
    }

    #[test]
    fn json_defaults_and_unknown_keys() {
        let c: ScenarioConfig = serde_json::from_str(r#"{"arrival_rate": 0.5}"#).unwrap();
        assert_eq!(c.arrival_rate, 0.5);
        assert_eq!(c.staff_count, 1);
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"arival_rate": 0.5}"#).is_err());
        let c: ScenarioConfig = serde_json::from_str(
            r#"{"entry_service": {"kind": "deterministic", "value": 2.0}}"#,
        )
        .unwrap();
        assert_eq!(c.entry_service, Distribution::Deterministic { value: 2.0 });
    }
}
