//! Inference providers behind one interface.
//!
//! The oracle and scripted backends are pure functions of their
//! configuration, replay is a pure function of its trace, and the live
//! backend talks to an Ollama-compatible HTTP endpoint.

mod live;
mod oracle;
mod record;
mod replay;
mod stub;

pub use live::LiveBackend;
pub use oracle::{oracle_sentence, LatencyScript, OracleBackend};
pub use record::{
    parse_inference_trace, prompt_digest, serialize_inference_trace, InferenceRecord,
    RecordParseError,
};
pub use replay::ReplayBackend;
pub use stub::{StubReply, StubServer};

/// One raw completion with its measured or scripted latency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub raw: String,
    pub latency_ns: u64,
    /// Non-fatal anomaly to surface in the simulation trace.
    pub warning: Option<String>,
}

impl Completion {
    pub fn new(raw: impl Into<String>, latency_ns: u64) -> Self {
        Self {
            raw: raw.into(),
            latency_ns,
            warning: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("inference trace exhausted at record {index}")]
    Exhausted { index: u64 },
    /// A failure captured in an inference trace, replayed verbatim.
    #[error("{0}")]
    Replayed(String),
    #[error(
        "prompt digest mismatch at record {index}: recorded {recorded:016x}, actual {actual:016x}"
    )]
    DigestMismatch {
        index: u64,
        recorded: u64,
        actual: u64,
    },
}

impl BackendError {
    /// Fatal errors stop the run; the rest engage the fallback.
    pub fn is_fatal(&self) -> bool {
        matches!(
            self,
            BackendError::Exhausted { .. } | BackendError::DigestMismatch { .. }
        )
    }
}

pub trait AgentBackend {
    fn complete(&mut self, prompt: &crate::coach::PromptDoc) -> Result<Completion, BackendError>;
}

impl<B: AgentBackend + ?Sized> AgentBackend for Box<B> {
    fn complete(&mut self, prompt: &crate::coach::PromptDoc) -> Result<Completion, BackendError> {
        (**self).complete(prompt)
    }
}

/// Fixed response with latencies cycling through a list.
#[derive(Clone, Debug)]
pub struct ScriptedBackend {
    raw: String,
    latencies_ns: Vec<u64>,
    calls: usize,
}

impl ScriptedBackend {
    pub fn new(raw: impl Into<String>, latencies_ns: Vec<u64>) -> Self {
        assert!(
            !latencies_ns.is_empty(),
            "scripted backend needs at least one latency"
        );
        Self {
            raw: raw.into(),
            latencies_ns,
            calls: 0,
        }
    }
}

impl AgentBackend for ScriptedBackend {
    fn complete(&mut self, _prompt: &crate::coach::PromptDoc) -> Result<Completion, BackendError> {
        let latency = self.latencies_ns[self.calls % self.latencies_ns.len()];
        self.calls += 1;
        Ok(Completion::new(self.raw.clone(), latency))
    }
}
