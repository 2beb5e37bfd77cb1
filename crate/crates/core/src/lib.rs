//! Fitting-room queueing model built twice, as a discrete-event simulation
//! and as an agent-based simulation, plus the statistics used to validate
//! either against reference waiting-time data.

pub mod agent_core;
pub mod event_core;
pub mod fitting_room;
pub mod harness;
pub mod queueing_oracle;
pub mod stats_suite;
