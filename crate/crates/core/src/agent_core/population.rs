use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use log::warn;

use crate::event_core::{EventCalendar, EventHandle, RngStream, SimTime};

use super::chart::{Delay, StateChart, StateId, Trigger};
use super::AgentError;

pub type AgentId = u64;

pub const DEFAULT_GUARD_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub tag: String,
    pub sender: AgentId,
    pub recipient: AgentId,
    pub payload: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AgentInstance<A> {
    id: AgentId,
    chart: Arc<StateChart<A>>,
    state: StateId,
    entered_at: SimTime,
    pub attributes: BTreeMap<String, f64>,
    timeout: Option<EventHandle>,
}

impl<A> AgentInstance<A> {
    pub fn id(&self) -> AgentId {
        self.id
    }

    pub fn chart(&self) -> &Arc<StateChart<A>> {
        &self.chart
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn state_name(&self) -> &str {
        self.chart.state_name(self.state)
    }

    pub fn entered_at(&self) -> SimTime {
        self.entered_at
    }

    pub fn attr(&self, key: &str) -> Option<f64> {
        self.attributes.get(key).copied()
    }

    /// Fire time of the armed timeout, if any.
    pub fn pending_timeout(&self) -> Option<SimTime> {
        self.timeout.map(|h| h.fire_time())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub time: SimTime,
    pub agent_id: AgentId,
    pub from_state: Arc<str>,
    pub to_state: Arc<str>,
    pub trigger: Arc<str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedMessage {
    pub time: SimTime,
    pub message: Message,
    pub reason: String,
}

/// Scenario-side hooks: guard evaluation and action effects.
pub trait AgentWorld<A> {
    fn guard(&self, guard: &str, agent: &AgentInstance<A>) -> bool;

    fn apply(&mut self, action: &A, ctx: &mut AgentContext<'_, A>) -> Result<(), AgentError>;
}

#[derive(Debug)]
enum AgentEvent {
    Timeout(AgentId),
    Deliver(Message),
}

/// Live agents sharing one calendar.
///
/// With `auto_notify` on (the default), guards are re-evaluated whenever a
/// time instant settles: after an event, if the next pending event lies
/// strictly later. Condition transitions therefore see every same-time
/// message and timeout first.
#[derive(Debug)]
pub struct Population<A> {
    calendar: EventCalendar<AgentEvent>,
    agents: BTreeMap<AgentId, AgentInstance<A>>,
    rng: RngStream,
    next_id: AgentId,
    pending_init: Vec<AgentId>,
    pending_despawn: Vec<AgentId>,
    log: Vec<TransitionRecord>,
    dropped: Vec<DroppedMessage>,
    logging: bool,
    auto_notify: bool,
    guard_cap: usize,
    spawned: u64,
    despawned: u64,
    timeouts_fired: u64,
    messages_delivered: u64,
}

/// Handle given to [`AgentWorld::apply`] for the agent whose action runs.
pub struct AgentContext<'a, A> {
    pop: &'a mut Population<A>,
    agent: AgentId,
}

impl<A> AgentContext<'_, A> {
    pub fn now(&self) -> SimTime {
        self.pop.calendar.clock()
    }

    pub fn agent_id(&self) -> AgentId {
        self.agent
    }

    pub fn attr(&self, key: &str) -> Option<f64> {
        self.pop.agents.get(&self.agent).and_then(|a| a.attr(key))
    }

    pub fn require_attr(&self, key: &str) -> Result<f64, AgentError> {
        self.attr(key).ok_or_else(|| AgentError::MissingAttribute {
            agent: self.agent,
            key: key.to_string(),
        })
    }

    pub fn set_attr(&mut self, key: &str, value: f64) {
        if let Some(a) = self.pop.agents.get_mut(&self.agent) {
            a.attributes.insert(key.to_string(), value);
        }
    }

    pub fn attr_of(&self, agent: AgentId, key: &str) -> Option<f64> {
        self.pop.agents.get(&agent).and_then(|a| a.attr(key))
    }

    pub fn set_attr_of(&mut self, agent: AgentId, key: &str, value: f64) -> Result<(), AgentError> {
        let a = self
            .pop
            .agents
            .get_mut(&agent)
            .ok_or(AgentError::UnknownAgent(agent))?;
        a.attributes.insert(key.to_string(), value);
        Ok(())
    }

    /// Sends from the acting agent, delivered at the current instant after
    /// every event already queued for it.
    pub fn send(&mut self, recipient: AgentId, tag: &str, payload: Option<f64>) -> Result<(), AgentError> {
        let at = self.now();
        self.send_at(recipient, tag, payload, at)
    }

    pub fn send_at(
        &mut self,
        recipient: AgentId,
        tag: &str,
        payload: Option<f64>,
        at: SimTime,
    ) -> Result<(), AgentError> {
        let msg = Message {
            tag: tag.to_string(),
            sender: self.agent,
            recipient,
            payload,
        };
        self.pop.send_message(msg, at)
    }

    /// Creates an agent. Its initial entry action and timeout run once the
    /// current transition has finished.
    pub fn spawn(&mut self, chart: &Arc<StateChart<A>>, attributes: BTreeMap<String, f64>) -> AgentId {
        let id = self.pop.insert_agent(chart, attributes);
        self.pop.pending_init.push(id);
        id
    }

    /// Removes an agent once the current transition has finished.
    pub fn despawn(&mut self, agent: AgentId) {
        self.pop.pending_despawn.push(agent);
    }

    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.pop.rng
    }
}

impl<A> Population<A> {
    /// `seed` feeds the stream used for [`Delay::Random`] timeouts.
    pub fn new(seed: u64) -> Self {
        Population {
            calendar: EventCalendar::new(),
            agents: BTreeMap::new(),
            rng: RngStream::new(seed, 0),
            next_id: 0,
            pending_init: Vec::new(),
            pending_despawn: Vec::new(),
            log: Vec::new(),
            dropped: Vec::new(),
            logging: true,
            auto_notify: true,
            guard_cap: DEFAULT_GUARD_CAP,
            spawned: 0,
            despawned: 0,
            timeouts_fired: 0,
            messages_delivered: 0,
        }
    }

    pub fn set_logging(&mut self, on: bool) {
        self.logging = on;
    }

    pub fn set_auto_notify(&mut self, on: bool) {
        self.auto_notify = on;
    }

    pub fn set_guard_cap(&mut self, cap: usize) {
        self.guard_cap = cap.max(1);
    }

    pub fn clock(&self) -> SimTime {
        self.calendar.clock()
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentInstance<A>> {
        self.agents.get(&id)
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentInstance<A>> {
        self.agents.values()
    }

    pub fn state_name(&self, id: AgentId) -> Option<&str> {
        self.agents.get(&id).map(|a| a.state_name())
    }

    pub fn live(&self) -> usize {
        self.agents.len()
    }

    pub fn spawned(&self) -> u64 {
        self.spawned
    }

    pub fn despawned(&self) -> u64 {
        self.despawned
    }

    pub fn timeouts_fired(&self) -> u64 {
        self.timeouts_fired
    }

    pub fn messages_delivered(&self) -> u64 {
        self.messages_delivered
    }

    pub fn pending_events(&self) -> usize {
        self.calendar.len()
    }

    pub fn transition_log(&self) -> &[TransitionRecord] {
        &self.log
    }

    pub fn dropped_messages(&self) -> &[DroppedMessage] {
        &self.dropped
    }

    pub fn spawn_agent<W: AgentWorld<A>>(
        &mut self,
        world: &mut W,
        chart: &Arc<StateChart<A>>,
        attributes: BTreeMap<String, f64>,
    ) -> Result<AgentId, AgentError> {
        let id = self.insert_agent(chart, attributes);
        self.pending_init.push(id);
        self.flush(world)?;
        Ok(id)
    }

    pub fn despawn<W: AgentWorld<A>>(&mut self, world: &mut W, id: AgentId) -> Result<(), AgentError> {
        if !self.agents.contains_key(&id) {
            return Err(AgentError::UnknownAgent(id));
        }
        self.pending_despawn.push(id);
        self.flush(world)
    }

    pub fn send_message(&mut self, msg: Message, at: SimTime) -> Result<(), AgentError> {
        self.calendar.schedule(at, AgentEvent::Deliver(msg))?;
        Ok(())
    }

    /// Fires condition transitions whose guard holds, at most one per agent
    /// per pass, agents in ascending id. Passes repeat until one fires
    /// nothing. Returns the number of transitions fired.
    pub fn notify_guards<W: AgentWorld<A>>(&mut self, world: &mut W) -> Result<usize, AgentError> {
        let mut total = 0;
        let mut passes = 0;
        loop {
            let candidates: Vec<AgentId> = self
                .agents
                .values()
                .filter(|a| a.chart.states[a.state].has_conditions)
                .map(|a| a.id)
                .collect();
            let mut fired = 0;
            for id in candidates {
                let Some(agent) = self.agents.get(&id) else { continue };
                let chart = Arc::clone(&agent.chart);
                let chosen = chart.outgoing(agent.state).find_map(|(i, t)| match &t.trigger {
                    Trigger::Condition(g) if world.guard(g, agent) => Some(i),
                    _ => None,
                });
                if let Some(i) = chosen {
                    self.fire(world, id, &chart, i)?;
                    fired += 1;
                }
            }
            if fired == 0 {
                return Ok(total);
            }
            total += fired;
            passes += 1;
            if passes >= self.guard_cap {
                return Err(AgentError::GuardCascadeOverflow { cap: self.guard_cap });
            }
        }
    }

    /// Executes every event up to and including `t_end`, then sets the clock
    /// to `t_end`. Returns the number of events executed.
    pub fn run_until<W: AgentWorld<A>>(&mut self, world: &mut W, t_end: SimTime) -> Result<u64, AgentError> {
        let n = self.run_inner(world, Some(t_end))?;
        self.calendar.advance_to(t_end);
        Ok(n)
    }

    /// Executes events until the calendar is empty.
    pub fn run_to_completion<W: AgentWorld<A>>(&mut self, world: &mut W) -> Result<u64, AgentError> {
        self.run_inner(world, None)
    }

    fn run_inner<W: AgentWorld<A>>(&mut self, world: &mut W, t_end: Option<SimTime>) -> Result<u64, AgentError> {
        if self.auto_notify {
            self.notify_guards(world)?;
        }
        let mut count = 0;
        loop {
            let event = match t_end {
                Some(t) => self.calendar.pop_due(t),
                None => self.calendar.pop_next(),
            };
            let Some(event) = event else { break };
            count += 1;
            match event.payload {
                AgentEvent::Timeout(id) => self.on_timeout(world, id)?,
                AgentEvent::Deliver(msg) => self.on_deliver(world, msg)?,
            }
            if self.auto_notify && self.calendar.peek_time() != Some(self.calendar.clock()) {
                self.notify_guards(world)?;
            }
        }
        Ok(count)
    }

    fn on_timeout<W: AgentWorld<A>>(&mut self, world: &mut W, id: AgentId) -> Result<(), AgentError> {
        let Some(agent) = self.agents.get_mut(&id) else {
            return Ok(());
        };
        agent.timeout = None;
        self.timeouts_fired += 1;
        let agent = &self.agents[&id];
        let chart = Arc::clone(&agent.chart);
        let chosen = chart.outgoing(agent.state).find_map(|(i, t)| match (&t.trigger, &t.guard) {
            (Trigger::Timeout(_), None) => Some(i),
            (Trigger::Timeout(_), Some(g)) if world.guard(g, agent) => Some(i),
            _ => None,
        });
        if let Some(i) = chosen {
            self.fire(world, id, &chart, i)?;
        }
        Ok(())
    }

    fn on_deliver<W: AgentWorld<A>>(&mut self, world: &mut W, msg: Message) -> Result<(), AgentError> {
        let Some(agent) = self.agents.get(&msg.recipient) else {
            self.drop_message(msg, "recipient does not exist".to_string());
            return Ok(());
        };
        let chart = Arc::clone(&agent.chart);
        let chosen = chart.outgoing(agent.state).find_map(|(i, t)| match (&t.trigger, &t.guard) {
            (Trigger::Message(tag), None) if *tag == msg.tag => Some(i),
            (Trigger::Message(tag), Some(g)) if *tag == msg.tag && world.guard(g, agent) => Some(i),
            _ => None,
        });
        match chosen {
            Some(i) => {
                self.messages_delivered += 1;
                self.fire(world, msg.recipient, &chart, i)
            }
            None => {
                let reason = format!("no transition for `{}` in state `{}`", msg.tag, agent.state_name());
                self.drop_message(msg, reason);
                Ok(())
            }
        }
    }

    fn drop_message(&mut self, message: Message, reason: String) {
        let time = self.calendar.clock();
        warn!(
            "t={time}: dropped message `{}` from {} to {}: {reason}",
            message.tag, message.sender, message.recipient
        );
        self.dropped.push(DroppedMessage { time, message, reason });
    }

    fn insert_agent(&mut self, chart: &Arc<StateChart<A>>, attributes: BTreeMap<String, f64>) -> AgentId {
        let id = self.next_id;
        self.next_id += 1;
        self.spawned += 1;
        self.agents.insert(
            id,
            AgentInstance {
                id,
                chart: Arc::clone(chart),
                state: chart.initial(),
                entered_at: self.calendar.clock(),
                attributes,
                timeout: None,
            },
        );
        id
    }

    /// Exit source (disarm timeout), run the transition action, enter the
    /// target (entry action, then arm its timeout).
    fn fire<W: AgentWorld<A>>(
        &mut self,
        world: &mut W,
        id: AgentId,
        chart: &Arc<StateChart<A>>,
        index: usize,
    ) -> Result<(), AgentError> {
        let transition = &chart.transitions[index];
        let now = self.calendar.clock();
        let agent = self.agents.get_mut(&id).ok_or(AgentError::UnknownAgent(id))?;
        if let Some(h) = agent.timeout.take() {
            self.calendar.cancel(h);
        }

        if let Some(action) = &transition.action {
            world.apply(action, &mut AgentContext { pop: self, agent: id })?;
        }

        let agent = self.agents.get_mut(&id).ok_or(AgentError::UnknownAgent(id))?;
        agent.state = transition.target;
        agent.entered_at = now;
        if self.logging {
            self.log.push(TransitionRecord {
                time: now,
                agent_id: id,
                from_state: Arc::clone(&chart.states[transition.source].name),
                to_state: Arc::clone(&chart.states[transition.target].name),
                trigger: Arc::clone(&transition.label),
            });
        }
        self.enter(world, id, chart, transition.target)?;
        self.flush(world)
    }

    fn enter<W: AgentWorld<A>>(
        &mut self,
        world: &mut W,
        id: AgentId,
        chart: &Arc<StateChart<A>>,
        state: StateId,
    ) -> Result<(), AgentError> {
        if let Some(action) = &chart.states[state].on_entry {
            world.apply(action, &mut AgentContext { pop: self, agent: id })?;
        }
        if self.pending_despawn.contains(&id) {
            return Ok(());
        }
        let Some(delay) = &chart.states[state].timeout else {
            return Ok(());
        };
        let minutes = match delay {
            Delay::Constant(c) => *c,
            Delay::Attribute(key) => self
                .agents
                .get(&id)
                .and_then(|a| a.attr(key))
                .ok_or_else(|| AgentError::MissingAttribute {
                    agent: id,
                    key: key.clone(),
                })?,
            Delay::Random(d) => self.rng.draw(d)?,
        };
        let handle = self.calendar.schedule_in(minutes, AgentEvent::Timeout(id))?;
        if let Some(agent) = self.agents.get_mut(&id) {
            agent.timeout = Some(handle);
        }
        Ok(())
    }

    /// Runs deferred spawn initialisation and despawns until none remain.
    fn flush<W: AgentWorld<A>>(&mut self, world: &mut W) -> Result<(), AgentError> {
        loop {
            if let Some(id) = self.pending_despawn.pop() {
                if let Some(agent) = self.agents.remove(&id) {
                    if let Some(h) = agent.timeout {
                        self.calendar.cancel(h);
                    }
                    self.despawned += 1;
                }
                continue;
            }
            if !self.pending_init.is_empty() {
                let id = self.pending_init.remove(0);
                let Some(agent) = self.agents.get(&id) else { continue };
                let chart = Arc::clone(&agent.chart);
                self.enter(world, id, &chart, chart.initial())?;
                continue;
            }
            return Ok(());
        }
    }

    /// Writes the transition log as CSV:
    /// `time,agent_id,from_state,to_state,trigger`.
    pub fn write_transition_log_csv<Wr: Write>(&self, out: Wr) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "agent_id", "from_state", "to_state", "trigger"])?;
        for r in &self.log {
            w.write_record([
                format!("{:.6}", r.time.minutes()),
                r.agent_id.to_string(),
                r.from_state.to_string(),
                r.to_state.to_string(),
                r.trigger.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
