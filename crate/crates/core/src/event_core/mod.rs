//! Discrete-event kernel: simulation clock, future-event list and seeded
//! random streams.
//!
//! Time is measured in minutes since the start of a run. Events that share
//! a timestamp fire in the order they were scheduled.

mod calendar;
mod rng;
mod time;

pub use calendar::{Event, EventCalendar, EventHandle};
pub use rng::{CountDistribution, Distribution, Purpose, RngStream};
pub use time::SimTime;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("cannot schedule at t={at} when the clock reads {clock}")]
    SchedulingInPast { at: f64, clock: f64 },
    #[error("invalid simulation time {0}: must be finite and non-negative")]
    InvalidTime(f64),
    #[error("invalid distribution parameter: {0}")]
    InvalidDistributionParameter(String),
}
