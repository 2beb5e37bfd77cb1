use serde::{Deserialize, Serialize};

use crate::event_core::{Purpose, RngStream};

use super::{FittingError, ScenarioConfig};

/// The three FIFO queues in front of the staff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueId {
    Entry,
    Help,
    Return,
}

impl QueueId {
    pub const ALL: [QueueId; 3] = [QueueId::Entry, QueueId::Help, QueueId::Return];

    /// Position in per-job arrays: job 1, job 2, job 3.
    pub fn index(self) -> usize {
        match self {
            QueueId::Entry => 0,
            QueueId::Help => 1,
            QueueId::Return => 2,
        }
    }

    pub fn job(self) -> StaffJob {
        match self {
            QueueId::Entry => StaffJob::CountAndCard,
            QueueId::Help => StaffJob::Help,
            QueueId::Return => StaffJob::ReceiveReturn,
        }
    }
}

/// Staff tasks: count garments and hand out the card, help in the cubicle,
/// take back the card and unwanted garments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaffJob {
    CountAndCard,
    Help,
    ReceiveReturn,
}

impl StaffJob {
    pub fn target_workload_fraction(self) -> f64 {
        match self {
            StaffJob::CountAndCard => 0.45,
            StaffJob::Help => 0.10,
            StaffJob::ReceiveReturn => 0.45,
        }
    }
}

/// Everything random about one customer, drawn when they arrive. Each
/// stream is consumed exactly once per customer, so customer `i` sees the
/// same values under either paradigm and under any arrival rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomerDraws {
    pub entry_service: f64,
    pub fitting: f64,
    pub wants_help: bool,
    pub help_service: f64,
    pub return_service: f64,
    pub garments: u32,
}

impl CustomerDraws {
    pub fn service(&self, queue: QueueId) -> f64 {
        match queue {
            QueueId::Entry => self.entry_service,
            QueueId::Help => self.help_service,
            QueueId::Return => self.return_service,
        }
    }
}

/// Purpose-indexed streams for one replication.
pub(crate) struct DrawSource {
    config: ScenarioConfig,
    arrivals: RngStream,
    entry: RngStream,
    help: RngStream,
    ret: RngStream,
    fitting: RngStream,
    help_decision: RngStream,
    garments: RngStream,
}

impl DrawSource {
    pub(crate) fn new(config: &ScenarioConfig, seed: u64) -> Self {
        let s = |p| RngStream::for_purpose(seed, p);
        DrawSource {
            config: config.clone(),
            arrivals: s(Purpose::Arrivals),
            entry: s(Purpose::EntryService),
            help: s(Purpose::HelpService),
            ret: s(Purpose::ReturnService),
            fitting: s(Purpose::FittingDuration),
            help_decision: s(Purpose::HelpDecision),
            garments: s(Purpose::GarmentCount),
        }
    }

    /// `None` when the scenario has no arrivals at all.
    pub(crate) fn next_interarrival(&mut self) -> Result<Option<f64>, FittingError> {
        Ok(match &self.config.interarrival {
            Some(d) => Some(self.arrivals.draw(d)?),
            None if self.config.arrival_rate > 0.0 => {
                let d = crate::event_core::Distribution::Exponential {
                    rate: self.config.arrival_rate,
                };
                Some(self.arrivals.draw(&d)?)
            }
            None => None,
        })
    }

    pub(crate) fn customer(&mut self) -> Result<CustomerDraws, FittingError> {
        let c = &self.config;
        let garments = self.garments.draw_count(&c.garment_count)?;
        let per_garment = c.per_garment_minutes.unwrap_or(0.0) * garments as f64;
        Ok(CustomerDraws {
            entry_service: self.entry.draw(&c.entry_service)? + per_garment,
            fitting: self.fitting.draw(&c.fitting_duration)?,
            wants_help: self.help_decision.bernoulli(c.help_probability),
            help_service: self.help.draw(&c.help_service)?,
            return_service: self.ret.draw(&c.return_service)? + per_garment,
            garments,
        })
    }
}

/// Join, service start and service end of one queue visit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub join: f64,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

impl StageTimes {
    fn joined(at: f64) -> Self {
        StageTimes {
            join: at,
            start: None,
            end: None,
        }
    }

    pub fn wait(&self) -> Option<f64> {
        self.start.map(|s| s - self.join)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerRecord {
    pub customer_id: u64,
    pub arrival_time: f64,
    pub garment_count: u32,
    pub wants_help: bool,
    pub entry: Option<StageTimes>,
    pub help: Option<StageTimes>,
    #[serde(rename = "return")]
    pub return_: Option<StageTimes>,
    pub departure: Option<f64>,
}

impl CustomerRecord {
    pub fn stage(&self, q: QueueId) -> Option<&StageTimes> {
        match q {
            QueueId::Entry => self.entry.as_ref(),
            QueueId::Help => self.help.as_ref(),
            QueueId::Return => self.return_.as_ref(),
        }
    }

    fn stage_mut(&mut self, q: QueueId) -> &mut Option<StageTimes> {
        match q {
            QueueId::Entry => &mut self.entry,
            QueueId::Help => &mut self.help,
            QueueId::Return => &mut self.return_,
        }
    }

    pub fn completed(&self) -> bool {
        self.departure.is_some()
    }

    /// Sum of waits over every queue where service has started.
    pub fn total_wait(&self) -> f64 {
        QueueId::ALL
            .iter()
            .filter_map(|&q| self.stage(q).and_then(StageTimes::wait))
            .sum()
    }

    pub(crate) fn join(&mut self, q: QueueId, at: f64) {
        *self.stage_mut(q) = Some(StageTimes::joined(at));
    }

    pub(crate) fn start(&mut self, q: QueueId, at: f64) {
        if let Some(s) = self.stage_mut(q) {
            s.start = Some(at);
        }
    }

    pub(crate) fn end(&mut self, q: QueueId, at: f64) {
        if let Some(s) = self.stage_mut(q) {
            s.end = Some(at);
        }
    }

    pub(crate) fn new(customer_id: u64, arrival_time: f64, draws: &CustomerDraws) -> Self {
        CustomerRecord {
            customer_id,
            arrival_time,
            garment_count: draws.garments,
            wants_help: draws.wants_help,
            entry: None,
            help: None,
            return_: None,
            departure: None,
        }
    }
}
