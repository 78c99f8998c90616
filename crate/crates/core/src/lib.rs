//! Deterministic simulation of a language-model driving coach in a
//! human-in-the-loop control loop.
//!
//! A scripted [`driver`] drives a kinematic [`plant`]; the [`coach`]
//! observes the car every perception period, queries an
//! [`backends::AgentBackend`], and warns the driver or brakes for them.
//! Everything runs on the logical-time kernel in [`runtime`], so a run is a
//! pure function of the scenario and the inference input series.

pub mod backends;
pub mod coach;
pub mod config;
pub mod driver;
pub mod latency;
pub mod plant;
pub mod runtime;
pub mod scenarios;
pub mod sim;
pub mod text;
pub mod units;

pub use coach::{CoachOutput, ControlSignal, PlannerMode};
pub use plant::{CarState, DriverCommand};
pub use runtime::{Tag, TraceEvent, TraceKind};
pub use scenarios::{ScenarioKind, ScenarioSpec};
pub use sim::{run_scenario, RunOptions, RunReport};
