//! The coach: prompt assembly, inference timing, response parsing and the
//! three-mode planner.

mod prompt;
mod response;

pub use prompt::{
    build_prompt, PromptContext, PromptDoc, PromptTemplate, TemplateError, PLACEHOLDERS,
    REQUIRED_USER,
};
pub use response::{parse_response, CoachOutput, ControlSignal, ParseError};

use std::fmt;

use crate::backends::{AgentBackend, BackendError};
use crate::config::{INSTRUCTION_MIN_GAP_NS, LATENCY_QUANTUM_NS};
use crate::runtime::{check_deadline, DeadlineStatus};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PlannerMode {
    #[default]
    Monitoring,
    Warning,
    Actuation,
}

impl PlannerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerMode::Monitoring => "monitoring",
            PlannerMode::Warning => "warning",
            PlannerMode::Actuation => "actuation",
        }
    }

    pub fn for_signal(signal: ControlSignal) -> Self {
        match signal {
            ControlSignal::None => PlannerMode::Monitoring,
            ControlSignal::Warning => PlannerMode::Warning,
            ControlSignal::Actuate => PlannerMode::Actuation,
        }
    }
}

impl fmt::Display for PlannerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThrottleDecision {
    Emit,
    Suppress,
}

/// Rate limit on forwarded instructions. A gap of exactly the minimum emits.
pub fn throttle(t_ns: u64, last_emit_ns: Option<u64>) -> ThrottleDecision {
    match last_emit_ns {
        Some(last) if t_ns.saturating_sub(last) < INSTRUCTION_MIN_GAP_NS => {
            ThrottleDecision::Suppress
        }
        _ => ThrottleDecision::Emit,
    }
}

/// What the planner does with one successful inference result.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlannerStep {
    pub transition: Option<(PlannerMode, PlannerMode)>,
    pub emitted: Option<String>,
    pub suppressed: Option<String>,
    pub actuate: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Planner {
    mode: PlannerMode,
    last_emit_ns: Option<u64>,
}

impl Planner {
    pub fn mode(&self) -> PlannerMode {
        self.mode
    }

    pub fn last_emit_ns(&self) -> Option<u64> {
        self.last_emit_ns
    }

    pub fn step(&mut self, output: &CoachOutput, t_ns: u64) -> PlannerStep {
        let next = PlannerMode::for_signal(output.signal());
        let mut step = PlannerStep::default();
        if next != self.mode {
            step.transition = Some((self.mode, next));
            self.mode = next;
        }
        if output.signal() == ControlSignal::None {
            return step;
        }
        step.actuate = output.signal() == ControlSignal::Actuate;
        let text = output.instruction().to_owned();
        match throttle(t_ns, self.last_emit_ns) {
            ThrottleDecision::Emit => {
                self.last_emit_ns = Some(t_ns);
                step.emitted = Some(text);
            }
            ThrottleDecision::Suppress => step.suppressed = Some(text),
        }
        step
    }
}

/// Latency rounded up to the scheduling quantum.
pub fn quantize_latency(latency_ns: u64) -> u64 {
    latency_ns
        .div_ceil(LATENCY_QUANTUM_NS)
        .saturating_mul(LATENCY_QUANTUM_NS)
}

/// Logical delay between an inference trigger and its result event. Late
/// and failed calls resolve exactly at the deadline.
pub fn result_delay(latency_ns: Option<u64>, deadline_ns: u64) -> u64 {
    match latency_ns {
        Some(l) if check_deadline(l, deadline_ns) == DeadlineStatus::Met => {
            quantize_latency(l).min(deadline_ns)
        }
        _ => deadline_ns,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InferOutcome {
    Ok {
        output: CoachOutput,
        latency_ns: u64,
    },
    DeadlineMiss {
        latency_ns: Option<u64>,
    },
    ParseError {
        error: ParseError,
        latency_ns: u64,
    },
}

impl InferOutcome {
    /// Whether the fallback action applies.
    pub fn needs_fallback(&self) -> bool {
        !matches!(self, InferOutcome::Ok { .. })
    }

    pub fn latency_ns(&self) -> Option<u64> {
        match self {
            InferOutcome::Ok { latency_ns, .. } | InferOutcome::ParseError { latency_ns, .. } => {
                Some(*latency_ns)
            }
            InferOutcome::DeadlineMiss { latency_ns } => *latency_ns,
        }
    }
}

/// Classifies one backend result against the deadline. Transport failures
/// count as misses. The raw text of a late response is discarded.
pub fn classify_completion(
    result: Result<&crate::backends::Completion, &BackendError>,
    deadline_ns: u64,
) -> InferOutcome {
    match result {
        Err(_) => InferOutcome::DeadlineMiss { latency_ns: None },
        Ok(c) if check_deadline(c.latency_ns, deadline_ns) == DeadlineStatus::Violated => {
            InferOutcome::DeadlineMiss {
                latency_ns: Some(c.latency_ns),
            }
        }
        Ok(c) => match parse_response(&c.raw) {
            Ok(output) => InferOutcome::Ok {
                output,
                latency_ns: c.latency_ns,
            },
            Err(error) => InferOutcome::ParseError {
                error,
                latency_ns: c.latency_ns,
            },
        },
    }
}

/// One complete inference outside the reactor model.
pub fn infer(prompt: &PromptDoc, backend: &mut dyn AgentBackend, deadline_ns: u64) -> InferOutcome {
    classify_completion(backend.complete(prompt).as_ref(), deadline_ns)
}
