use std::fmt;
use std::str::FromStr;

use super::Tag;
use crate::text;

/// Category of a recorded trace event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceKind {
    PortWrite,
    TimerFire,
    ModeTransition,
    DeadlineMiss,
    Fallback,
    Instruction,
    Actuation,
    Suppressed,
    InferenceSkipped,
    ParseError,
    BackendError,
    ReplayWarning,
}

impl TraceKind {
    pub const ALL: [TraceKind; 12] = [
        TraceKind::PortWrite,
        TraceKind::TimerFire,
        TraceKind::ModeTransition,
        TraceKind::DeadlineMiss,
        TraceKind::Fallback,
        TraceKind::Instruction,
        TraceKind::Actuation,
        TraceKind::Suppressed,
        TraceKind::InferenceSkipped,
        TraceKind::ParseError,
        TraceKind::BackendError,
        TraceKind::ReplayWarning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::PortWrite => "port-write",
            TraceKind::TimerFire => "timer-fire",
            TraceKind::ModeTransition => "mode-transition",
            TraceKind::DeadlineMiss => "deadline-miss",
            TraceKind::Fallback => "fallback",
            TraceKind::Instruction => "instruction",
            TraceKind::Actuation => "actuation",
            TraceKind::Suppressed => "suppressed",
            TraceKind::InferenceSkipped => "inference-skipped",
            TraceKind::ParseError => "parse-error",
            TraceKind::BackendError => "backend-error",
            TraceKind::ReplayWarning => "replay-warning",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceKind {
    type Err = ParseTraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TraceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ParseTraceError(format!("unknown trace kind `{s}`")))
    }
}

/// One observable step of a run. The ordered list of these is the run's
/// behavior; two runs agree iff their serialized traces are byte-equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub tag: Tag,
    pub source: String,
    pub kind: TraceKind,
    pub payload: String,
}

impl TraceEvent {
    /// `tag_ns.microstep<TAB>source<TAB>kind<TAB>payload`, payload escaped.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.tag,
            self.source,
            self.kind,
            text::escape(&self.payload)
        )
    }

    pub fn parse_line(line: &str) -> Result<Self, ParseTraceError> {
        let mut fields = line.splitn(4, '\t');
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| ParseTraceError(format!("missing {what} in `{line}`")))
        };
        let tag = next("tag")?
            .parse()
            .map_err(|e: super::tag::ParseTagError| ParseTraceError(e.to_string()))?;
        let source = next("source")?.to_owned();
        let kind = next("kind")?.parse()?;
        let payload = text::unescape(next("payload")?)
            .ok_or_else(|| ParseTraceError(format!("bad escape in `{line}`")))?;
        Ok(Self {
            tag,
            source,
            kind,
            payload,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ParseTraceError(pub String);

/// Canonical trace file contents: one line per event, each `\n`-terminated.
pub fn serialize_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        out.push_str(&ev.to_line());
        out.push('\n');
    }
    out
}

pub fn parse_trace(contents: &str) -> Result<Vec<TraceEvent>, ParseTraceError> {
    contents.lines().map(TraceEvent::parse_line).collect()
}

/// First line (1-based) at which two serialized traces differ, with the two
/// differing lines (`None` for a missing line).
pub fn first_divergence<'a>(
    left: &'a str,
    right: &'a str,
) -> Option<(usize, Option<&'a str>, Option<&'a str>)> {
    let mut l = left.lines();
    let mut r = right.lines();
    let mut n = 0;
    loop {
        n += 1;
        match (l.next(), r.next()) {
            (None, None) => return None,
            (a, b) if a == b => continue,
            (a, b) => return Some((n, a, b)),
        }
    }
}
