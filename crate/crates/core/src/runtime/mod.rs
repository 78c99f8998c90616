//! Minimal reactor-style discrete-event kernel.
//!
//! Reactors own state and reactions. Reactions are triggered by ports,
//! timers and logical actions, and write to ports. Connections carry a
//! logical delay; a zero delay delivers at the next microstep. All events
//! are processed in [`Tag`] order and, within a tag, reactions run in a
//! topological order fixed when the topology is finalized, so a run is a
//! pure function of the topology and the injected inputs.
//!
//! Physical time never enters the kernel: deadline checks compare an
//! elapsed time supplied by the caller (usually carried in the triggering
//! event's payload) against the reaction's deadline.

mod kernel;
mod tag;
mod trace;

pub use kernel::{
    check_deadline, ActionId, ConfigError, Ctx, DeadlineStatus, Event, Payload, PortId,
    ReactionHandle, ReactionId, ReactorHandle, ReactorId, Runtime, RuntimeError, TimerId,
    TopologyBuilder, Trigger,
};
pub use tag::{ParseTagError, Tag, MS, SECOND};
pub use trace::{
    first_divergence, parse_trace, serialize_trace, ParseTraceError, TraceEvent, TraceKind,
};
