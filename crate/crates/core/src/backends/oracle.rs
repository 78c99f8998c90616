use super::{AgentBackend, BackendError, Completion};
use crate::coach::{ControlSignal, PromptDoc};
use crate::config::ORACLE_LATENCY_NS;
use crate::scenarios::{assess, Assessment, Cause};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatencyScript {
    Constant(u64),
    /// One latency per call; the last value repeats once the list runs out.
    Sequence(Vec<u64>),
}

impl LatencyScript {
    fn at(&self, call: usize) -> u64 {
        match self {
            LatencyScript::Constant(ns) => *ns,
            LatencyScript::Sequence(list) => list.get(call).or(list.last()).copied().unwrap_or(0),
        }
    }
}

/// Templated instruction for an assessment. Wording is chosen so the
/// driver's keyword table maps it to the intended directive.
pub fn oracle_sentence(a: &Assessment) -> String {
    let d = a.deviation_mps.abs();
    match (a.signal, a.cause) {
        (ControlSignal::None, _) | (_, Cause::OnTrack) => String::new(),
        (ControlSignal::Warning, Cause::TooFast) => {
            format!("Slow down, you are {d:.1} m/s above the safe speed.")
        }
        (ControlSignal::Warning, Cause::TooSlow) => {
            format!("Speed up, you are {d:.1} m/s below the safe speed.")
        }
        (ControlSignal::Actuate, Cause::TooFast) => {
            format!("Braking for you, you are {d:.1} m/s too fast.")
        }
        (ControlSignal::Actuate, Cause::TooSlow) => {
            format!("Braking for you, you are {d:.1} m/s off the safe speed.")
        }
        (_, Cause::NoHeadCheck) => "Check your right mirror before you steer right.".into(),
        (_, Cause::MissedLane) => "Braking for you, the lane change was missed.".into(),
    }
}

/// Deterministic rule-based coach over the envelope classifier.
#[derive(Clone, Debug)]
pub struct OracleBackend {
    latency: LatencyScript,
    forced: Option<ControlSignal>,
    calls: usize,
}

impl Default for OracleBackend {
    fn default() -> Self {
        Self::new(LatencyScript::Constant(ORACLE_LATENCY_NS))
    }
}

impl OracleBackend {
    pub fn new(latency: LatencyScript) -> Self {
        Self {
            latency,
            forced: None,
            calls: 0,
        }
    }

    /// Emits `signal` on every call regardless of the observation.
    pub fn forcing(mut self, signal: ControlSignal) -> Self {
        self.forced = Some(signal);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl AgentBackend for OracleBackend {
    fn complete(&mut self, prompt: &PromptDoc) -> Result<Completion, BackendError> {
        let ctx = prompt.context.as_ref().ok_or_else(|| {
            BackendError::Malformed("oracle needs the observation context".into())
        })?;
        let mut assessment = assess(&ctx.envelope, &ctx.observation);
        if let Some(signal) = self.forced {
            assessment.signal = signal;
            if assessment.cause == Cause::OnTrack {
                assessment.cause = if assessment.deviation_mps > 0.0 {
                    Cause::TooFast
                } else {
                    Cause::TooSlow
                };
            }
        }
        let latency = self.latency.at(self.calls);
        self.calls += 1;
        let raw = format!("{}|{}", assessment.signal, oracle_sentence(&assessment));
        Ok(Completion::new(raw, latency))
    }
}
