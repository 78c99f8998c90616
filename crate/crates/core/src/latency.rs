//! Inference latency benchmark for deadline selection.

use std::fmt;

use crate::backends::AgentBackend;
use crate::coach::PromptDoc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatencyReport {
    /// Successful latencies in call order.
    pub samples: Vec<u64>,
    pub failures: Vec<String>,
    pub min_ns: u64,
    pub median_ns: u64,
    pub p95_ns: u64,
    pub max_ns: u64,
}

impl LatencyReport {
    /// The worst observed latency.
    pub fn suggested_deadline_ns(&self) -> u64 {
        self.max_ns
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("all {runs} inference calls failed; first error: {first}")]
pub struct AllFailed {
    pub runs: usize,
    pub first: String,
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[u64], p: usize) -> u64 {
    let rank = (p * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

/// Issues `runs` completions of the same prompt.
pub fn run_latency_bench(
    backend: &mut dyn AgentBackend,
    prompt: &PromptDoc,
    runs: usize,
) -> Result<LatencyReport, AllFailed> {
    let mut samples = Vec::with_capacity(runs);
    let mut failures = Vec::new();
    for _ in 0..runs {
        match backend.complete(prompt) {
            Ok(c) => samples.push(c.latency_ns),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if samples.is_empty() {
        return Err(AllFailed {
            runs,
            first: failures
                .first()
                .cloned()
                .unwrap_or_else(|| "no runs".into()),
        });
    }
    let mut sorted = samples.clone();
    sorted.sort_unstable();
    Ok(LatencyReport {
        min_ns: sorted[0],
        median_ns: percentile(&sorted, 50),
        p95_ns: percentile(&sorted, 95),
        max_ns: sorted[sorted.len() - 1],
        samples,
        failures,
    })
}

fn ms(ns: u64) -> f64 {
    ns as f64 / 1e6
}

impl fmt::Display for LatencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples: {}", self.samples.len())?;
        writeln!(f, "failures: {}", self.failures.len())?;
        writeln!(f, "min_ms: {:.3}", ms(self.min_ns))?;
        writeln!(f, "median_ms: {:.3}", ms(self.median_ns))?;
        writeln!(f, "p95_ms: {:.3}", ms(self.p95_ns))?;
        writeln!(f, "max_ms: {:.3}", ms(self.max_ns))?;
        write!(
            f,
            "suggested_deadline_ms: {:.3}",
            ms(self.suggested_deadline_ns())
        )
    }
}
