use std::io::Write;

use serde::{Deserialize, Serialize};

use super::tally::Tally;
use super::{CustomerRecord, FittingError, QueueId, ScenarioConfig, WaitingMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Paradigm {
    #[serde(rename = "DES")]
    Des,
    #[serde(rename = "ABS")]
    Abs,
}

impl Paradigm {
    pub fn label(self) -> &'static str {
        match self {
            Paradigm::Des => "DES",
            Paradigm::Abs => "ABS",
        }
    }
}

/// Per-visit waits of completed customers, one list per queue.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerQueueSamples {
    pub entry: Vec<f64>,
    pub help: Vec<f64>,
    #[serde(rename = "return")]
    pub return_: Vec<f64>,
}

impl PerQueueSamples {
    pub fn get(&self, q: QueueId) -> &[f64] {
        match q {
            QueueId::Entry => &self.entry,
            QueueId::Help => &self.help,
            QueueId::Return => &self.return_,
        }
    }

    fn get_mut(&mut self, q: QueueId) -> &mut Vec<f64> {
        match q {
            QueueId::Entry => &mut self.entry,
            QueueId::Help => &mut self.help,
            QueueId::Return => &mut self.return_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub seed: u64,
    pub paradigm: Paradigm,
    pub customers_arrived: u64,
    pub customers_completed: u64,
    pub customers_in_system_at_close: u64,
    /// Completed customers only, shaped by the scenario's waiting metric.
    pub waiting_time_sample: Vec<f64>,
    pub per_queue_samples: PerQueueSamples,
    /// Jobs 1, 2 and 3.
    pub staff_busy_minutes_by_job: [f64; 3],
    pub staff_count: u32,
    /// Simulated minutes from opening to the end of the run.
    pub elapsed_minutes: f64,
    /// Time-average number of customers waiting in any queue.
    pub time_avg_waiting: f64,
    /// Wall-clock seconds; not part of reproducibility comparisons.
    pub run_wall_time: f64,
    pub warning: Option<String>,
    /// Full per-customer timeline, dropped when results are compacted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub customers: Vec<CustomerRecord>,
}

impl ReplicationResult {
    /// Mean over completed customers of their summed waits.
    pub fn mean_total_wait(&self) -> Option<f64> {
        if self.customers_completed == 0 {
            return None;
        }
        let total: f64 = QueueId::ALL
            .iter()
            .flat_map(|&q| self.per_queue_samples.get(q))
            .sum();
        Some(total / self.customers_completed as f64)
    }

    /// Mean of `waiting_time_sample`, absent when nobody completed.
    pub fn mean_wait(&self) -> Option<f64> {
        crate::stats_suite::mean(&self.waiting_time_sample)
    }

    pub fn observed_arrival_rate(&self) -> f64 {
        self.customers_arrived as f64 / self.elapsed_minutes
    }

    /// Drops the per-customer timeline.
    pub fn compact(mut self) -> Self {
        self.customers = Vec::new();
        self
    }

    /// Copy with wall-clock timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        ReplicationResult {
            run_wall_time: 0.0,
            ..self.clone()
        }
    }

    pub(crate) fn assemble(
        tally: &mut Tally,
        config: &ScenarioConfig,
        seed: u64,
        paradigm: Paradigm,
        elapsed: f64,
        in_progress_busy: [f64; 3],
        wall: f64,
    ) -> Self {
        let area = tally.waiting_area(elapsed);
        let mut waiting_time_sample = Vec::new();
        let mut per_queue = PerQueueSamples::default();
        let mut completed = 0;
        for r in tally.records.iter().filter(|r| r.completed()) {
            completed += 1;
            for q in QueueId::ALL {
                if let Some(w) = r.stage(q).and_then(|s| s.wait()) {
                    per_queue.get_mut(q).push(w);
                    if config.waiting_metric == WaitingMetric::PerQueue {
                        waiting_time_sample.push(w);
                    }
                }
            }
            if config.waiting_metric == WaitingMetric::PerCustomerTotal {
                waiting_time_sample.push(r.total_wait());
            }
        }
        let mut busy = tally.busy;
        for (b, extra) in busy.iter_mut().zip(in_progress_busy) {
            *b += extra;
        }
        let arrived = tally.records.len() as u64;
        ReplicationResult {
            seed,
            paradigm,
            customers_arrived: arrived,
            customers_completed: completed,
            customers_in_system_at_close: arrived - completed,
            waiting_time_sample,
            per_queue_samples: per_queue,
            staff_busy_minutes_by_job: busy,
            staff_count: config.staff_count,
            elapsed_minutes: elapsed,
            time_avg_waiting: area / elapsed,
            run_wall_time: wall,
            warning: config.stability_warning(),
            customers: std::mem::take(&mut tally.records),
        }
    }
}

/// Share of staff busy time spent on jobs 1, 2 and 3.
pub fn workload_fractions(result: &ReplicationResult) -> Result<[f64; 3], FittingError> {
    let b = result.staff_busy_minutes_by_job;
    let total: f64 = b.iter().sum();
    if total <= 0.0 {
        return Err(FittingError::NoBusyTime);
    }
    Ok([b[0] / total, b[1] / total, b[2] / total])
}

/// Per-customer CSV for completed customers:
/// `customer_id,arrival_time,total_wait,entry_wait,help_wait,return_wait`.
/// A queue the customer never visited is left empty.
pub fn write_samples_csv<W: Write>(result: &ReplicationResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "customer_id",
        "arrival_time",
        "total_wait",
        "entry_wait",
        "help_wait",
        "return_wait",
    ])?;
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in result.customers.iter().filter(|r| r.completed()) {
        let wait = |q| r.stage(q).and_then(|s| s.wait());
        w.write_record([
            r.customer_id.to_string(),
            format!("{:.6}", r.arrival_time),
            format!("{:.6}", r.total_wait()),
            fmt(wait(QueueId::Entry)),
            fmt(wait(QueueId::Help)),
            fmt(wait(QueueId::Return)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_busy(busy: [f64; 3]) -> ReplicationResult {
        ReplicationResult {
            seed: 0,
            paradigm: Paradigm::Des,
            customers_arrived: 0,
            customers_completed: 0,
            customers_in_system_at_close: 0,
            waiting_time_sample: vec![],
            per_queue_samples: PerQueueSamples::default(),
            staff_busy_minutes_by_job: busy,
            staff_count: 1,
            elapsed_minutes: 480.0,
            time_avg_waiting: 0.0,
            run_wall_time: 0.0,
            warning: None,
            customers: vec![],
        }
    }

    #[test]
    fn fractions_arithmetic() {
        let f = workload_fractions(&with_busy([90.0, 20.0, 90.0])).unwrap();
        assert!((f[0] - 0.45).abs() < 1e-12);
        assert!((f[1] - 0.10).abs() < 1e-12);
        assert!((f[2] - 0.45).abs() < 1e-12);
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_busy_time() {
        assert!(matches!(
            workload_fractions(&with_busy([0.0; 3])),
            Err(FittingError::NoBusyTime)
        ));
    }

    #[test]
    fn empty_result_has_no_mean() {
        let r = with_busy([0.0; 3]);
        assert_eq!(r.mean_wait(), None);
        assert_eq!(r.mean_total_wait(), None);
    }
}
