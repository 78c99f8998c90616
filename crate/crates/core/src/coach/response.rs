use std::fmt;
use std::str::FromStr;

/// Discrete decision emitted with every coach response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlSignal {
    /// Driver is within the velocity bounds; no intervention.
    None,
    /// Driver deviates from the bounds but can still recover.
    Warning,
    /// Safety limits are violated; the coach actuates the car.
    Actuate,
}

impl ControlSignal {
    pub const ALL: [ControlSignal; 3] = [
        ControlSignal::None,
        ControlSignal::Warning,
        ControlSignal::Actuate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlSignal::None => "NONE",
            ControlSignal::Warning => "WARNING",
            ControlSignal::Actuate => "ACTUATE",
        }
    }
}

impl fmt::Display for ControlSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlSignal {
    type Err = ParseError;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ControlSignal::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ParseError::UnknownSignal(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty response")]
    Empty,
    #[error("no `|` separator in `{0}`")]
    MissingSeparator(String),
    #[error("unknown control signal `{0}`")]
    UnknownSignal(String),
    #[error("{0} requires an instruction")]
    EmptyInstruction(ControlSignal),
    #[error("response has content after the first line")]
    MultiLine,
    #[error("instruction must be one trimmed line")]
    InvalidInstruction,
}

/// A control signal with its one-sentence instruction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoachOutput {
    signal: ControlSignal,
    instruction: String,
}

impl CoachOutput {
    /// The instruction must be a single trimmed line, and non-empty unless
    /// the signal is `NONE`.
    pub fn new(signal: ControlSignal, instruction: impl Into<String>) -> Result<Self, ParseError> {
        let instruction = instruction.into();
        if instruction.contains(['\n', '\r']) || instruction.trim() != instruction {
            return Err(ParseError::InvalidInstruction);
        }
        if instruction.is_empty() && signal != ControlSignal::None {
            return Err(ParseError::EmptyInstruction(signal));
        }
        Ok(Self {
            signal,
            instruction,
        })
    }

    pub fn signal(&self) -> ControlSignal {
        self.signal
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }
}

/// `SIGNAL|instruction`
impl fmt::Display for CoachOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.signal, self.instruction)
    }
}

/// Parses a raw model response of the form `Signal|Message`.
///
/// Surrounding whitespace is ignored. The pair must sit on the first line
/// and nothing but whitespace may follow it.
pub fn parse_response(raw: &str) -> Result<CoachOutput, ParseError> {
    let trimmed = raw.trim();
    let mut lines = trimmed.lines();
    let first = lines
        .next()
        .filter(|l| !l.trim().is_empty())
        .ok_or(ParseError::Empty)?;
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(ParseError::MultiLine);
    }
    let (signal, instruction) = first
        .split_once('|')
        .ok_or_else(|| ParseError::MissingSeparator(first.to_owned()))?;
    let signal: ControlSignal = signal.trim().parse()?;
    CoachOutput::new(signal, instruction.trim())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let out = parse_response("WARNING|Apply gentle braking now.").unwrap();
        assert_eq!(out.signal(), ControlSignal::Warning);
        assert_eq!(out.instruction(), "Apply gentle braking now.");

        let none = parse_response("NONE|").unwrap();
        assert_eq!(
            (none.signal(), none.instruction()),
            (ControlSignal::None, "")
        );

        let lower = parse_response("  actuate | Braking for you.\n\n").unwrap();
        assert_eq!(lower.to_string(), "ACTUATE|Braking for you.");
    }

    #[test]
    fn malformed() {
        assert_eq!(
            parse_response("slow down please"),
            Err(ParseError::MissingSeparator("slow down please".into()))
        );
        assert_eq!(parse_response(""), Err(ParseError::Empty));
        assert_eq!(
            parse_response("WARNING|"),
            Err(ParseError::EmptyInstruction(ControlSignal::Warning))
        );
        assert_eq!(
            parse_response("DANGER|Stop."),
            Err(ParseError::UnknownSignal("DANGER".into()))
        );
        assert_eq!(
            parse_response("NONE|ok\nWARNING|Slow."),
            Err(ParseError::MultiLine)
        );
    }

    #[test]
    fn construction_rules() {
        assert!(CoachOutput::new(ControlSignal::Warning, "Slow down.\nNow.").is_err());
        assert!(CoachOutput::new(ControlSignal::Warning, " padded").is_err());
        assert!(CoachOutput::new(ControlSignal::Actuate, "").is_err());
        assert!(CoachOutput::new(ControlSignal::None, "").is_ok());
    }
}
