use super::{prompt_digest, AgentBackend, BackendError, Completion, InferenceRecord};
use crate::coach::PromptDoc;

/// Serves recorded completions in index order.
#[derive(Clone, Debug)]
pub struct ReplayBackend {
    records: Vec<InferenceRecord>,
    cursor: usize,
    strict: bool,
}

impl ReplayBackend {
    /// With `strict`, a prompt whose digest differs from the recording is a
    /// fatal error; otherwise it is reported as a warning.
    pub fn new(records: Vec<InferenceRecord>, strict: bool) -> Self {
        Self {
            records,
            cursor: 0,
            strict,
        }
    }

    pub fn consumed(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.records.len() - self.cursor
    }
}

impl AgentBackend for ReplayBackend {
    fn complete(&mut self, prompt: &PromptDoc) -> Result<Completion, BackendError> {
        let record = self
            .records
            .get(self.cursor)
            .ok_or(BackendError::Exhausted {
                index: self.cursor as u64,
            })?;
        let actual = prompt_digest(prompt);
        let mut warning = None;
        if actual != record.prompt_digest {
            let mismatch = BackendError::DigestMismatch {
                index: record.index,
                recorded: record.prompt_digest,
                actual,
            };
            if self.strict {
                return Err(mismatch);
            }
            warning = Some(mismatch.to_string());
        }
        self.cursor += 1;
        match &record.response {
            Ok(raw) => Ok(Completion {
                raw: raw.clone(),
                latency_ns: record.latency_ns,
                warning,
            }),
            Err(msg) => Err(BackendError::Replayed(msg.clone())),
        }
    }
}
