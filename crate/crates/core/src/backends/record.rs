//! Inference trace file format.
//!
//! One record per line: `index<TAB>digest_hex<TAB>latency_ns<TAB>raw`, with
//! the raw response escaped. A failed call stores its error message behind
//! the marker `\e`, which plain escaping never produces.

use std::hash::Hasher;

use fnv::FnvHasher;

use crate::coach::PromptDoc;
use crate::text::{escape, unescape};

const ERROR_MARKER: &str = "\\e";

/// FNV-1a 64 over the prompt's canonical bytes.
pub fn prompt_digest(prompt: &PromptDoc) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&prompt.canonical_bytes());
    h.finish()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceRecord {
    pub index: u64,
    pub prompt_digest: u64,
    pub latency_ns: u64,
    /// Raw response text, or the error message of a failed call.
    pub response: Result<String, String>,
}

impl InferenceRecord {
    /// Record of one backend call. Fatal errors are not part of the input
    /// series and yield `None`.
    pub fn capture(
        index: u64,
        prompt: &PromptDoc,
        result: &Result<super::Completion, super::BackendError>,
    ) -> Option<Self> {
        let (response, latency_ns) = match result {
            Ok(c) => (Ok(c.raw.clone()), c.latency_ns),
            Err(e) if e.is_fatal() => return None,
            Err(e) => (Err(e.to_string()), 0),
        };
        Some(Self {
            index,
            prompt_digest: prompt_digest(prompt),
            latency_ns,
            response,
        })
    }

    pub fn to_line(&self) -> String {
        let raw = match &self.response {
            Ok(raw) => escape(raw),
            Err(msg) => format!("{ERROR_MARKER}{}", escape(msg)),
        };
        format!(
            "{}\t{:016x}\t{}\t{}",
            self.index, self.prompt_digest, self.latency_ns, raw
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("inference trace line {line}: {reason}")]
pub struct RecordParseError {
    pub line: usize,
    pub reason: String,
}

pub fn serialize_inference_trace(records: &[InferenceRecord]) -> String {
    records.iter().map(|r| r.to_line() + "\n").collect()
}

/// Parses a trace file. Indices must run 0, 1, 2, ... in order.
pub fn parse_inference_trace(text: &str) -> Result<Vec<InferenceRecord>, RecordParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |reason: &str| RecordParseError {
            line: i + 1,
            reason: reason.to_owned(),
        };
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(4, '\t');
        let mut next = |name: &str| fields.next().ok_or_else(|| err(&format!("missing {name}")));
        let index: u64 = next("index")?.parse().map_err(|_| err("bad index"))?;
        let digest = u64::from_str_radix(next("digest")?, 16).map_err(|_| err("bad digest"))?;
        let latency_ns: u64 = next("latency")?.parse().map_err(|_| err("bad latency"))?;
        let raw = next("response")?;
        let response = match raw.strip_prefix(ERROR_MARKER) {
            Some(msg) => Err(unescape(msg).ok_or_else(|| err("bad escape"))?),
            None => Ok(unescape(raw).ok_or_else(|| err("bad escape"))?),
        };
        if index != out.len() as u64 {
            return Err(err(&format!("expected index {}, found {index}", out.len())));
        }
        out.push(InferenceRecord {
            index,
            prompt_digest: digest,
            latency_ns,
            response,
        });
    }
    Ok(out)
}
