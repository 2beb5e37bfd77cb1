//! Process-flow realisation: customers are passive records routed by event
//! routines; one dispatch step per settled instant hands idle staff their
//! next job.

use std::time::Instant;

use crate::event_core::{EventCalendar, SimTime};

use super::customer::DrawSource;
use super::tally::Tally;
use super::{
    staff_select_next_job, ClosePolicy, FittingError, Paradigm, QueueId, ReplicationResult,
    ScenarioConfig,
};

#[derive(Debug)]
enum Step {
    Arrival,
    FittingEnd { customer: usize },
    ServiceEnd { staff: usize, queue: QueueId, customer: usize, started: f64 },
}

struct Job {
    queue: QueueId,
    started: f64,
}

struct DesModel<'a> {
    config: &'a ScenarioConfig,
    calendar: EventCalendar<Step>,
    draws: DrawSource,
    tally: Tally,
    staff: Vec<Option<Job>>,
    horizon: SimTime,
}

impl DesModel<'_> {
    fn schedule_arrival(&mut self) -> Result<(), FittingError> {
        if let Some(gap) = self.draws.next_interarrival()? {
            let at = self.calendar.clock().after(gap)?;
            if at < self.horizon {
                self.calendar.schedule(at, Step::Arrival)?;
            }
        }
        Ok(())
    }

    fn handle(&mut self, step: Step) -> Result<(), FittingError> {
        let now = self.calendar.clock().minutes();
        match step {
            Step::Arrival => {
                let draws = self.draws.customer()?;
                let idx = self.tally.arrive(now, draws);
                self.tally.join(QueueId::Entry, idx, now);
                self.schedule_arrival()?;
            }
            Step::FittingEnd { customer } => {
                let next = if self.tally.draws[customer].wants_help {
                    QueueId::Help
                } else {
                    QueueId::Return
                };
                self.tally.join(next, customer, now);
            }
            Step::ServiceEnd {
                staff,
                queue,
                customer,
                started,
            } => {
                self.staff[staff] = None;
                self.tally.finish(queue, customer, started, now);
                match queue {
                    QueueId::Entry => {
                        let fitting = self.tally.draws[customer].fitting;
                        self.calendar
                            .schedule_in(fitting, Step::FittingEnd { customer })?;
                    }
                    // help ends the fitting; no further cubicle time
                    QueueId::Help => self.tally.join(QueueId::Return, customer, now),
                    QueueId::Return => self.tally.depart(customer, now),
                }
            }
        }
        Ok(())
    }

    fn dispatch(&mut self) -> Result<(), FittingError> {
        let now = self.calendar.clock().minutes();
        for s in 0..self.staff.len() {
            if self.staff[s].is_some() {
                continue;
            }
            let Some(queue) = staff_select_next_job(&self.tally.heads(), self.config.job_selection_policy)
            else {
                break;
            };
            let customer = self.tally.take_head(queue, now).expect("selected queue is non-empty");
            let duration = self.tally.draws[customer].service(queue);
            self.calendar.schedule_in(
                duration,
                Step::ServiceEnd {
                    staff: s,
                    queue,
                    customer,
                    started: now,
                },
            )?;
            self.staff[s] = Some(Job { queue, started: now });
        }
        Ok(())
    }

    fn run(&mut self) -> Result<(), FittingError> {
        self.schedule_arrival()?;
        let limit = match self.config.close_policy {
            ClosePolicy::HardCut => Some(self.horizon),
            ClosePolicy::FinishInSystem => None,
        };
        loop {
            let step = match limit {
                Some(t) => self.calendar.pop_due(t),
                None => self.calendar.pop_next(),
            };
            let Some(event) = step else { break };
            self.handle(event.payload)?;
            if self.calendar.peek_time() != Some(self.calendar.clock()) {
                self.dispatch()?;
            }
        }
        Ok(())
    }
}

/// One replication of the process-flow model.
pub fn run_des_replication(config: &ScenarioConfig, seed: u64) -> Result<ReplicationResult, FittingError> {
    config.validate()?;
    let wall = Instant::now();
    let mut model = DesModel {
        config,
        calendar: EventCalendar::new(),
        draws: DrawSource::new(config, seed),
        tally: Tally::new(),
        staff: (0..config.staff_count).map(|_| None).collect(),
        horizon: SimTime::new(config.horizon_minutes)?,
    };
    model.run()?;

    let (elapsed, in_progress) = match config.close_policy {
        ClosePolicy::HardCut => {
            let end = config.horizon_minutes;
            let mut partial = [0.0; 3];
            for job in model.staff.iter().flatten() {
                partial[job.queue.index()] += end - job.started;
            }
            (end, partial)
        }
        ClosePolicy::FinishInSystem => (
            model.calendar.clock().minutes().max(config.horizon_minutes),
            [0.0; 3],
        ),
    };
    Ok(ReplicationResult::assemble(
        &mut model.tally,
        config,
        seed,
        Paradigm::Des,
        elapsed,
        in_progress,
        wall.elapsed().as_secs_f64(),
    ))
}
