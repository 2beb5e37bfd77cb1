//! Agent-based kernel. Agents carry a [`StateChart`] and react to timeouts,
//! messages and guard conditions; all timing goes through an
//! [`EventCalendar`](crate::event_core::EventCalendar), so agent runs share
//! the discrete-event clock semantics.

mod chart;
mod population;

pub use chart::{Delay, StateChart, StateId, StateSpec, Transition, TransitionSpec, Trigger};
pub use population::{
    AgentContext, AgentId, AgentInstance, AgentWorld, DroppedMessage, Message, Population,
    TransitionRecord, DEFAULT_GUARD_CAP,
};

use thiserror::Error;

use crate::event_core::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("invalid state chart `{chart}`: {reason}")]
    InvalidChart { chart: String, reason: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("guard evaluation did not settle within {cap} passes")]
    GuardCascadeOverflow { cap: usize },
    #[error("no live agent with id {0}")]
    UnknownAgent(AgentId),
    #[error("agent {agent} has no attribute `{key}`")]
    MissingAttribute { agent: AgentId, key: String },
    #[error("{0}")]
    Scenario(String),
}
