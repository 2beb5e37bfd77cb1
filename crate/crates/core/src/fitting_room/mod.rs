//! The fitting-room scenario, built twice: once as a process-flow
//! discrete-event model ([`run_des_replication`]) and once as interacting
//! agents ([`run_abs_replication`]).
//!
//! Customers arrive, queue for garment counting (job 1), try garments on,
//! may queue for help (job 2), then queue to hand back the card and unwanted
//! garments (job 3). Staff serve all three queues.
//!
//! Both models draw every customer's random quantities from the same
//! purpose-indexed streams at arrival, so under a shared seed customer `i`
//! gets identical draws in either paradigm.

mod abs;
mod config;
mod customer;
mod des;
mod dispatch;
mod result;
mod tally;

pub use abs::{customer_chart, door_chart, run_abs_replication, run_abs_replication_traced, staff_chart, Act};
pub use config::{
    ClosePolicy, JobSelectionPolicy, ScenarioConfig, WaitingMetric, CALIBRATED_ARRIVAL_RATE,
    DEFAULT_ENTRY_MEAN, DEFAULT_FITTING_MEAN, DEFAULT_GARMENT_MEAN, DEFAULT_HELP_MEAN,
    DEFAULT_HELP_PROBABILITY, DEFAULT_RETURN_MEAN,
};
pub use customer::{CustomerDraws, CustomerRecord, QueueId, StaffJob, StageTimes};
pub use des::run_des_replication;
pub use dispatch::{staff_select_next_job, QueueHeads};
pub use result::{workload_fractions, write_samples_csv, Paradigm, PerQueueSamples, ReplicationResult};

use thiserror::Error;

use crate::agent_core::AgentError;
use crate::event_core::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FittingError {
    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("replication recorded no staff busy time")]
    NoBusyTime,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("i/o: {0}")]
    Io(String),
}

/// Runs one replication under the given paradigm.
pub fn run_replication(
    paradigm: Paradigm,
    config: &ScenarioConfig,
    seed: u64,
) -> Result<ReplicationResult, FittingError> {
    match paradigm {
        Paradigm::Des => run_des_replication(config, seed),
        Paradigm::Abs => run_abs_replication(config, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_core::Distribution;

    fn no_contention() -> ScenarioConfig {
        ScenarioConfig {
            interarrival: Some(Distribution::Deterministic { value: 10.0 }),
            entry_service: Distribution::Deterministic { value: 1.0 },
            fitting_duration: Distribution::Deterministic { value: 2.0 },
            return_service: Distribution::Deterministic { value: 1.0 },
            help_probability: 0.0,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn no_arrivals_gives_empty_sample() {
        let cfg = ScenarioConfig {
            arrival_rate: 0.0,
            ..ScenarioConfig::default()
        };
        for p in [Paradigm::Des, Paradigm::Abs] {
            let r = run_replication(p, &cfg, 7).unwrap();
            assert_eq!(r.customers_arrived, 0);
            assert!(r.waiting_time_sample.is_empty());
            assert_eq!(r.mean_wait(), None);
            assert_eq!(r.elapsed_minutes, 480.0);
        }
    }

    #[test]
    fn hand_traced_no_contention_schedule() {
        // arrivals at 10, 20, ..., 470; each visit is busy on [a, a+1] and
        // [a+3, a+4], done before a+10
        for p in [Paradigm::Des, Paradigm::Abs] {
            let r = run_replication(p, &no_contention(), 1).unwrap();
            assert_eq!(r.customers_arrived, 47);
            assert_eq!(r.customers_completed, 47);
            assert!(r.waiting_time_sample.iter().all(|&w| w == 0.0));
            let c = &r.customers[3];
            assert_eq!(c.arrival_time, 40.0);
            assert_eq!(c.entry.unwrap().end, Some(41.0));
            assert_eq!(c.return_.unwrap().join, 43.0);
            assert_eq!(c.departure, Some(44.0));
            assert_eq!(r.staff_busy_minutes_by_job, [47.0, 0.0, 47.0]);
            assert_eq!(r.elapsed_minutes, 480.0);
        }
    }

    #[test]
    fn hard_cut_leaves_customers_inside() {
        let cfg = ScenarioConfig {
            close_policy: ClosePolicy::HardCut,
            horizon_minutes: 42.5,
            ..no_contention()
        };
        for p in [Paradigm::Des, Paradigm::Abs] {
            let r = run_replication(p, &cfg, 1).unwrap();
            // arrival at 40 is still fitting at 42.5
            assert_eq!(r.customers_arrived, 4);
            assert_eq!(r.customers_completed, 3);
            assert_eq!(r.customers_in_system_at_close, 1);
            assert_eq!(r.staff_busy_minutes_by_job, [4.0, 0.0, 3.0]);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = ScenarioConfig {
            horizon_minutes: 0.0,
            ..ScenarioConfig::default()
        };
        for p in [Paradigm::Des, Paradigm::Abs] {
            assert!(matches!(
                run_replication(p, &cfg, 1),
                Err(FittingError::InvalidConfig { .. })
            ));
        }
    }

    #[test]
    fn help_path_is_visited() {
        let cfg = ScenarioConfig {
            help_probability: 1.0,
            ..no_contention()
        };
        for p in [Paradigm::Des, Paradigm::Abs] {
            let r = run_replication(p, &cfg, 3).unwrap();
            assert_eq!(r.per_queue_samples.help.len(), 47);
            assert!(r.customers.iter().all(|c| c.help.is_some()));
        }
    }

    #[test]
    fn paradigms_agree_on_default_scenario() {
        let cfg = ScenarioConfig::default();
        for seed in 0..5 {
            let d = run_des_replication(&cfg, seed).unwrap();
            let a = run_abs_replication(&cfg, seed).unwrap();
            assert_eq!(d.waiting_time_sample, a.waiting_time_sample);
            assert_eq!(d.customers, a.customers);
        }
    }

    #[test]
    fn traced_run_writes_transitions() {
        let mut buf = Vec::new();
        let r = run_abs_replication_traced(&no_contention(), 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,agent_id,from_state,to_state,trigger\n"));
        assert!(text.contains("WaitEntry,BeingServedEntry,message:staff_ready"));
        assert!(text.contains("Idle,ServingEntry,condition:next_is_entry"));
        assert_eq!(r.customers_completed, 47);
    }
}
