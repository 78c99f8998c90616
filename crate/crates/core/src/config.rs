//! Timing and inference defaults shared by every model.

use crate::runtime::{MS, SECOND};

/// Period of the driver perception timer, the plant step and the inference
/// trigger.
pub const PERCEPTION_PERIOD_NS: u64 = 100 * MS;
/// Logical delay from driver perception to the car's input.
pub const DRIVER_DELAY_NS: u64 = 500 * MS;
/// Logical delay from coach actuation to the car's input.
pub const ACTUATION_DELAY_NS: u64 = 200 * MS;
/// Deadline on the inference reaction unless a scenario overrides it.
pub const DEFAULT_DEADLINE_NS: u64 = 250 * MS;
/// Minimum gap between two instructions forwarded to the driver.
pub const INSTRUCTION_MIN_GAP_NS: u64 = SECOND;

pub const MAX_TOKENS: u32 = 30;
pub const TEMPERATURE: f64 = 0.0;

/// Half width of the velocity band around the desirable velocity, m/s.
pub const DEFAULT_BAND_MPS: f64 = 2.0;
/// Deviation beyond the band still treated as recoverable, m/s.
pub const RECOVERABLE_MARGIN_MPS: f64 = 2.0;
pub const DEFAULT_HORIZON_NS: u64 = 60 * SECOND;
/// Scheduling granularity for inference latencies.
pub const LATENCY_QUANTUM_NS: u64 = MS;
/// Latency of the oracle backend unless scripted.
pub const ORACLE_LATENCY_NS: u64 = 50 * MS;
/// Samples collected by the latency benchmark.
pub const BENCH_RUNS: usize = 300;
