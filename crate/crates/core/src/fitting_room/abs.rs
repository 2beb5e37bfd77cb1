//! Agent realisation: customers, staff and the door are agents with their
//! own state charts, coordinating through messages and guard conditions.
//!
//! Customer: WaitEntry -> BeingServedEntry -> Fitting -> [WaitHelp ->
//! BeingHelped ->] WaitReturn -> BeingServedReturn -> Departed.
//! Staff: Idle -> ServingEntry | Helping | ServingReturn -> Idle.
//! Door: Open (self-loop per arrival) -> Closed.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::agent_core::{
    AgentContext, AgentError, AgentId, AgentInstance, AgentWorld, Delay, Population, StateChart,
    StateSpec, TransitionSpec,
};
use crate::event_core::SimTime;

use super::customer::DrawSource;
use super::tally::Tally;
use super::{
    staff_select_next_job, ClosePolicy, FittingError, JobSelectionPolicy, Paradigm, QueueId,
    ReplicationResult, ScenarioConfig,
};

const CUSTOMER: &str = "customer";
const SERVICE: &str = "service";
const FITTING: &str = "fitting";
const INTERARRIVAL: &str = "interarrival";

const STAFF_READY: &str = "staff_ready";
const SERVICE_DONE: &str = "service_done";
const CLOSE: &str = "close";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Act {
    Join(QueueId),
    Depart,
    Start(QueueId),
    Finish(QueueId),
    Arrive,
}

fn guard_for(q: QueueId) -> &'static str {
    match q {
        QueueId::Entry => "next_is_entry",
        QueueId::Help => "next_is_help",
        QueueId::Return => "next_is_return",
    }
}

pub fn customer_chart() -> StateChart<Act> {
    let states = vec![
        StateSpec::new("WaitEntry").on_entry(Act::Join(QueueId::Entry)),
        StateSpec::new("BeingServedEntry"),
        StateSpec::new("Fitting"),
        StateSpec::new("WaitHelp").on_entry(Act::Join(QueueId::Help)),
        StateSpec::new("BeingHelped"),
        StateSpec::new("WaitReturn").on_entry(Act::Join(QueueId::Return)),
        StateSpec::new("BeingServedReturn"),
        StateSpec::new("Departed").on_entry(Act::Depart),
    ];
    let fitting = || Delay::Attribute(FITTING.into());
    let transitions = vec![
        TransitionSpec::message("WaitEntry", "BeingServedEntry", STAFF_READY),
        TransitionSpec::message("BeingServedEntry", "Fitting", SERVICE_DONE),
        TransitionSpec::timeout("Fitting", "WaitHelp", fitting()).guarded("wants_help"),
        TransitionSpec::timeout("Fitting", "WaitReturn", fitting()),
        TransitionSpec::message("WaitHelp", "BeingHelped", STAFF_READY),
        TransitionSpec::message("BeingHelped", "WaitReturn", SERVICE_DONE),
        TransitionSpec::message("WaitReturn", "BeingServedReturn", STAFF_READY),
        TransitionSpec::message("BeingServedReturn", "Departed", SERVICE_DONE),
    ];
    StateChart::new("customer", states, "WaitEntry", transitions).expect("customer chart is valid")
}

pub fn staff_chart() -> StateChart<Act> {
    let states = ["Idle", "ServingEntry", "Helping", "ServingReturn"]
        .map(StateSpec::new)
        .to_vec();
    let mut transitions = Vec::new();
    for (q, busy) in [
        (QueueId::Entry, "ServingEntry"),
        (QueueId::Help, "Helping"),
        (QueueId::Return, "ServingReturn"),
    ] {
        transitions.push(TransitionSpec::condition("Idle", busy, guard_for(q)).with_action(Act::Start(q)));
        transitions.push(
            TransitionSpec::timeout(busy, "Idle", Delay::Attribute(SERVICE.into())).with_action(Act::Finish(q)),
        );
    }
    StateChart::new("staff", states, "Idle", transitions).expect("staff chart is valid")
}

pub fn door_chart() -> StateChart<Act> {
    let states = vec![StateSpec::new("Open"), StateSpec::new("Closed")];
    let transitions = vec![
        TransitionSpec::timeout("Open", "Open", Delay::Attribute(INTERARRIVAL.into())).with_action(Act::Arrive),
        TransitionSpec::message("Open", "Closed", CLOSE),
    ];
    StateChart::new("door", states, "Open", transitions).expect("door chart is valid")
}

struct Serving {
    queue: QueueId,
    customer: usize,
    started: f64,
}

struct FittingRoom {
    policy: JobSelectionPolicy,
    horizon: f64,
    draws: DrawSource,
    tally: Tally,
    customer_chart: Arc<StateChart<Act>>,
    customer_agents: Vec<AgentId>,
    serving: HashMap<AgentId, Serving>,
    draw_error: Option<FittingError>,
}

impl FittingRoom {
    fn customer_of(ctx: &AgentContext<'_, Act>) -> Result<usize, AgentError> {
        ctx.require_attr(CUSTOMER).map(|c| c as usize)
    }
}

impl AgentWorld<Act> for FittingRoom {
    fn guard(&self, guard: &str, agent: &AgentInstance<Act>) -> bool {
        let next = || staff_select_next_job(&self.tally.heads(), self.policy);
        match guard {
            "wants_help" => agent
                .attr(CUSTOMER)
                .is_some_and(|c| self.tally.draws[c as usize].wants_help),
            "next_is_entry" => next() == Some(QueueId::Entry),
            "next_is_help" => next() == Some(QueueId::Help),
            "next_is_return" => next() == Some(QueueId::Return),
            _ => false,
        }
    }

    fn apply(&mut self, action: &Act, ctx: &mut AgentContext<'_, Act>) -> Result<(), AgentError> {
        let now = ctx.now().minutes();
        match *action {
            Act::Join(q) => {
                let c = Self::customer_of(ctx)?;
                self.tally.join(q, c, now);
            }
            Act::Depart => {
                let c = Self::customer_of(ctx)?;
                self.tally.depart(c, now);
                ctx.despawn(ctx.agent_id());
            }
            Act::Start(q) => {
                let c = self
                    .tally
                    .take_head(q, now)
                    .ok_or_else(|| AgentError::Scenario(format!("{q:?} queue empty at start")))?;
                ctx.set_attr(SERVICE, self.tally.draws[c].service(q));
                self.serving.insert(
                    ctx.agent_id(),
                    Serving {
                        queue: q,
                        customer: c,
                        started: now,
                    },
                );
                ctx.send(self.customer_agents[c], STAFF_READY, None)?;
            }
            Act::Finish(q) => {
                let job = self
                    .serving
                    .remove(&ctx.agent_id())
                    .ok_or_else(|| AgentError::Scenario("finished a job never started".into()))?;
                debug_assert_eq!(job.queue, q);
                self.tally.finish(q, job.customer, job.started, now);
                ctx.send(self.customer_agents[job.customer], SERVICE_DONE, None)?;
            }
            Act::Arrive => {
                let draws = match self.draws.customer() {
                    Ok(d) => d,
                    Err(e) => {
                        let msg = e.to_string();
                        self.draw_error = Some(e);
                        return Err(AgentError::Scenario(msg));
                    }
                };
                let idx = self.tally.arrive(now, draws);
                let attrs = BTreeMap::from([
                    (CUSTOMER.to_string(), idx as f64),
                    (FITTING.to_string(), draws.fitting),
                ]);
                let agent = ctx.spawn(&self.customer_chart, attrs);
                self.customer_agents.push(agent);
                self.schedule_next_arrival(ctx, now)?;
            }
        }
        Ok(())
    }
}

impl FittingRoom {
    /// Sets the door's next interarrival gap, or tells it to close when the
    /// next arrival would fall at or after the horizon.
    fn schedule_next_arrival(&mut self, ctx: &mut AgentContext<'_, Act>, now: f64) -> Result<(), AgentError> {
        match self.draws.next_interarrival() {
            Ok(Some(gap)) if now + gap < self.horizon => {
                ctx.set_attr(INTERARRIVAL, gap);
                Ok(())
            }
            Ok(_) => ctx.send(ctx.agent_id(), CLOSE, None),
            Err(e) => {
                let msg = e.to_string();
                self.draw_error = Some(e);
                Err(AgentError::Scenario(msg))
            }
        }
    }
}

fn run(config: &ScenarioConfig, seed: u64, logging: bool) -> Result<(ReplicationResult, Population<Act>), FittingError> {
    config.validate()?;
    let wall = Instant::now();
    let mut world = FittingRoom {
        policy: config.job_selection_policy,
        horizon: config.horizon_minutes,
        draws: DrawSource::new(config, seed),
        tally: Tally::new(),
        customer_chart: Arc::new(customer_chart()),
        customer_agents: Vec::new(),
        serving: HashMap::new(),
        draw_error: None,
    };
    let mut pop = Population::new(seed);
    pop.set_logging(logging);

    let staff = Arc::new(staff_chart());
    for _ in 0..config.staff_count {
        pop.spawn_agent(&mut world, &staff, BTreeMap::new())?;
    }
    if let Some(first) = world.draws.next_interarrival()? {
        if first < config.horizon_minutes {
            let door = Arc::new(door_chart());
            let attrs = BTreeMap::from([(INTERARRIVAL.to_string(), first)]);
            pop.spawn_agent(&mut world, &door, attrs)?;
        }
    }

    let outcome = match config.close_policy {
        ClosePolicy::HardCut => pop.run_until(&mut world, SimTime::new(config.horizon_minutes)?),
        ClosePolicy::FinishInSystem => pop.run_to_completion(&mut world),
    };
    if let Err(e) = outcome {
        return Err(world.draw_error.take().unwrap_or(FittingError::Agent(e)));
    }

    let (elapsed, in_progress) = match config.close_policy {
        ClosePolicy::HardCut => {
            let end = config.horizon_minutes;
            let mut partial = [0.0; 3];
            for job in world.serving.values() {
                partial[job.queue.index()] += end - job.started;
            }
            (end, partial)
        }
        ClosePolicy::FinishInSystem => (pop.clock().minutes().max(config.horizon_minutes), [0.0; 3]),
    };
    let result = ReplicationResult::assemble(
        &mut world.tally,
        config,
        seed,
        Paradigm::Abs,
        elapsed,
        in_progress,
        wall.elapsed().as_secs_f64(),
    );
    Ok((result, pop))
}

/// One replication of the agent-based model.
pub fn run_abs_replication(config: &ScenarioConfig, seed: u64) -> Result<ReplicationResult, FittingError> {
    run(config, seed, false).map(|(r, _)| r)
}

/// Like [`run_abs_replication`], also writing every agent transition as
/// CSV (`time,agent_id,from_state,to_state,trigger`).
pub fn run_abs_replication_traced<W: Write>(
    config: &ScenarioConfig,
    seed: u64,
    log_out: W,
) -> Result<ReplicationResult, FittingError> {
    let (result, pop) = run(config, seed, true)?;
    pop.write_transition_log_csv(log_out)
        .map_err(|e| FittingError::Io(e.to_string()))?;
    Ok(result)
}
