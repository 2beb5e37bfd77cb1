use std::collections::HashMap;
use std::sync::Arc;

use crate::event_core::Distribution;

use super::AgentError;

pub type StateId = usize;

/// How long a timeout transition waits after its source state is entered.
#[derive(Debug, Clone, PartialEq)]
pub enum Delay {
    Constant(f64),
    /// Read from the agent's attribute map when the state is entered.
    Attribute(String),
    /// Drawn from the population's random stream on entry.
    Random(Distribution),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trigger {
    Timeout(Delay),
    Message(String),
    /// Named guard, re-evaluated whenever the population is notified.
    Condition(String),
}

#[derive(Debug, Clone)]
pub struct StateSpec<A> {
    pub name: String,
    pub on_entry: Option<A>,
}

impl<A> StateSpec<A> {
    pub fn new(name: impl Into<String>) -> Self {
        StateSpec {
            name: name.into(),
            on_entry: None,
        }
    }

    pub fn on_entry(mut self, action: A) -> Self {
        self.on_entry = Some(action);
        self
    }
}

/// Unvalidated transition, referring to states by name.
///
/// `guard` qualifies timeout and message triggers: when the trigger occurs
/// the first outgoing transition whose guard holds (or that has none) fires.
#[derive(Debug, Clone)]
pub struct TransitionSpec<A> {
    pub source: String,
    pub target: String,
    pub trigger: Trigger,
    pub guard: Option<String>,
    pub action: Option<A>,
}

impl<A> TransitionSpec<A> {
    pub fn new(source: impl Into<String>, target: impl Into<String>, trigger: Trigger) -> Self {
        TransitionSpec {
            source: source.into(),
            target: target.into(),
            trigger,
            guard: None,
            action: None,
        }
    }

    pub fn timeout(source: impl Into<String>, target: impl Into<String>, delay: Delay) -> Self {
        Self::new(source, target, Trigger::Timeout(delay))
    }

    pub fn message(
        source: impl Into<String>,
        target: impl Into<String>,
        tag: impl Into<String>,
    ) -> Self {
        Self::new(source, target, Trigger::Message(tag.into()))
    }

    pub fn condition(
        source: impl Into<String>,
        target: impl Into<String>,
        guard: impl Into<String>,
    ) -> Self {
        Self::new(source, target, Trigger::Condition(guard.into()))
    }

    pub fn guarded(mut self, guard: impl Into<String>) -> Self {
        self.guard = Some(guard.into());
        self
    }

    pub fn with_action(mut self, action: A) -> Self {
        self.action = Some(action);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Transition<A> {
    pub source: StateId,
    pub target: StateId,
    pub trigger: Trigger,
    pub guard: Option<String>,
    pub action: Option<A>,
    pub(crate) label: Arc<str>,
}

impl<A> Transition<A> {
    /// `timeout`, `message:<tag>` or `condition:<guard>`.
    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone)]
pub(crate) struct State<A> {
    pub(crate) name: Arc<str>,
    pub(crate) on_entry: Option<A>,
    pub(crate) timeout: Option<Delay>,
    pub(crate) outgoing: Vec<usize>,
    pub(crate) has_conditions: bool,
}

/// Flat state chart: named states, one initial state, and timeout, message
/// or condition transitions between them. No hierarchy or parallel regions.
#[derive(Debug, Clone)]
pub struct StateChart<A> {
    name: String,
    pub(crate) states: Vec<State<A>>,
    initial: StateId,
    pub(crate) transitions: Vec<Transition<A>>,
}

impl<A> StateChart<A> {
    pub fn new(
        name: impl Into<String>,
        states: Vec<StateSpec<A>>,
        initial: &str,
        transitions: Vec<TransitionSpec<A>>,
    ) -> Result<Self, AgentError> {
        let name = name.into();
        let invalid = |why: String| AgentError::InvalidChart {
            chart: name.clone(),
            reason: why,
        };

        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.name.clone(), i).is_some() {
                return Err(invalid(format!("state `{}` declared twice", s.name)));
            }
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| invalid(format!("undeclared state `{n}`")))
        };
        let initial = lookup(initial)?;

        let mut built: Vec<State<A>> = states
            .into_iter()
            .map(|s| State {
                name: Arc::from(s.name),
                on_entry: s.on_entry,
                timeout: None,
                outgoing: Vec::new(),
                has_conditions: false,
            })
            .collect();

        let mut out = Vec::with_capacity(transitions.len());
        for (i, t) in transitions.into_iter().enumerate() {
            let source = lookup(&t.source)?;
            let target = lookup(&t.target)?;
            let label: Arc<str> = match &t.trigger {
                Trigger::Timeout(delay) => {
                    if let Delay::Constant(c) = delay {
                        if !(c.is_finite() && *c >= 0.0) {
                            return Err(invalid(format!("negative or non-finite timeout {c}")));
                        }
                    }
                    if let Delay::Random(d) = delay {
                        d.validate().map_err(|e| invalid(e.to_string()))?;
                    }
                    match &built[source].timeout {
                        Some(existing) if existing != delay => {
                            return Err(invalid(format!(
                                "state `{}` has timeout transitions with different delays",
                                t.source
                            )))
                        }
                        _ => built[source].timeout = Some(delay.clone()),
                    }
                    Arc::from("timeout")
                }
                Trigger::Message(tag) => Arc::from(format!("message:{tag}")),
                Trigger::Condition(guard) => {
                    if t.guard.is_some() {
                        return Err(invalid(format!(
                            "condition transition `{guard}` cannot carry a second guard"
                        )));
                    }
                    built[source].has_conditions = true;
                    Arc::from(format!("condition:{guard}"))
                }
            };
            built[source].outgoing.push(i);
            out.push(Transition {
                source,
                target,
                trigger: t.trigger,
                guard: t.guard,
                action: t.action,
                label,
            });
        }

        Ok(StateChart {
            name,
            states: built,
            initial,
            transitions: out,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id].name
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| &*s.name == name)
    }

    pub fn transitions(&self) -> &[Transition<A>] {
        &self.transitions
    }

    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = (usize, &Transition<A>)> {
        self.states[state]
            .outgoing
            .iter()
            .map(move |&i| (i, &self.transitions[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Chart = StateChart<()>;

    #[test]
    fn undeclared_initial_state_is_invalid() {
        let err = Chart::new("c", vec![StateSpec::new("A")], "B", vec![]).unwrap_err();
        assert!(matches!(err, AgentError::InvalidChart { .. }));
    }

    #[test]
    fn undeclared_target_is_invalid() {
        let err = Chart::new(
            "c",
            vec![StateSpec::new("A")],
            "A",
            vec![TransitionSpec::message("A", "Z", "go")],
        )
        .unwrap_err();
        assert!(err.to_string().contains("`Z`"));
    }

    #[test]
    fn duplicate_states_are_invalid() {
        assert!(Chart::new("c", vec![StateSpec::new("A"), StateSpec::new("A")], "A", vec![]).is_err());
    }

    #[test]
    fn conflicting_timeouts_are_invalid() {
        let err = Chart::new(
            "c",
            vec![StateSpec::new("A"), StateSpec::new("B")],
            "A",
            vec![
                TransitionSpec::timeout("A", "B", Delay::Constant(1.0)),
                TransitionSpec::timeout("A", "A", Delay::Constant(2.0)).guarded("g"),
            ],
        );
        assert!(err.is_err());
    }

    #[test]
    fn labels_name_the_trigger() {
        let chart = Chart::new(
            "c",
            vec![StateSpec::new("A"), StateSpec::new("B")],
            "A",
            vec![
                TransitionSpec::timeout("A", "B", Delay::Constant(1.0)),
                TransitionSpec::message("B", "A", "ping"),
                TransitionSpec::condition("B", "B", "ready"),
            ],
        )
        .unwrap();
        let labels: Vec<_> = chart.transitions().iter().map(|t| t.label()).collect();
        assert_eq!(labels, vec!["timeout", "message:ping", "condition:ready"]);
        assert_eq!(chart.state_id("B"), Some(1));
    }
}
