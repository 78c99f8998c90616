//! Prompt templates and prompt assembly.
//!
//! A template file has a `[system]` section and a `[user]` section. Named
//! placeholders in braces are filled from the current observation; `{{` and
//! `}}` produce literal braces.

use std::fmt::Write as _;

use crate::config::{MAX_TOKENS, TEMPERATURE};
use crate::scenarios::{Observation, SafetyEnvelope};

pub const PLACEHOLDERS: [&str; 6] = [
    "velocity",
    "displacement",
    "steer",
    "head",
    "envelope_lower",
    "envelope_upper",
];

/// Placeholders the user section must contain.
pub const REQUIRED_USER: [&str; 4] = ["velocity", "displacement", "steer", "head"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("missing `[{0}]` section")]
    MissingSection(&'static str),
    #[error("text before the first section")]
    LeadingText,
    #[error("duplicate `[{0}]` section")]
    DuplicateSection(String),
    #[error("unknown section `[{0}]`")]
    UnknownSection(String),
    #[error("unknown placeholder `{{{0}}}`")]
    UnknownPlaceholder(String),
    #[error("unterminated `{{` in {0} section")]
    Unterminated(&'static str),
    #[error("stray `}}` in {0} section")]
    StrayBrace(&'static str),
    #[error("user section lacks `{{{0}}}`")]
    MissingPlaceholder(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptTemplate {
    system: Vec<Piece>,
    user: Vec<Piece>,
}

fn compile(section: &'static str, src: &str) -> Result<Vec<Piece>, TemplateError> {
    let mut pieces = Vec::new();
    let mut text = String::new();
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                text.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                text.push('}');
            }
            '}' => return Err(TemplateError::StrayBrace(section)),
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(ch) => name.push(ch),
                        None => return Err(TemplateError::Unterminated(section)),
                    }
                }
                let slot = PLACEHOLDERS
                    .into_iter()
                    .find(|p| *p == name)
                    .ok_or(TemplateError::UnknownPlaceholder(name))?;
                if !text.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut text)));
                }
                pieces.push(Piece::Slot(slot));
            }
            _ => text.push(c),
        }
    }
    if !text.is_empty() {
        pieces.push(Piece::Text(text));
    }
    Ok(pieces)
}

impl PromptTemplate {
    pub fn parse(src: &str) -> Result<Self, TemplateError> {
        let mut system: Option<String> = None;
        let mut user: Option<String> = None;
        let mut current: Option<&mut String> = None;
        for line in src.lines() {
            let header = line.trim();
            if header.starts_with('[') && header.ends_with(']') && !header.contains(' ') {
                let slot = match &header[1..header.len() - 1] {
                    "system" => &mut system,
                    "user" => &mut user,
                    other => return Err(TemplateError::UnknownSection(other.to_owned())),
                };
                if slot.is_some() {
                    return Err(TemplateError::DuplicateSection(header.to_owned()));
                }
                current = Some(slot.insert(String::new()));
                continue;
            }
            match current.as_deref_mut() {
                Some(buf) => {
                    buf.push_str(line);
                    buf.push('\n');
                }
                None if line.trim().is_empty() => {}
                None => return Err(TemplateError::LeadingText),
            }
        }
        let system = system.ok_or(TemplateError::MissingSection("system"))?;
        let user = user.ok_or(TemplateError::MissingSection("user"))?;
        let template = Self {
            system: compile("system", system.trim())?,
            user: compile("user", user.trim())?,
        };
        for name in REQUIRED_USER {
            if !template.user.contains(&Piece::Slot(name)) {
                return Err(TemplateError::MissingPlaceholder(name));
            }
        }
        Ok(template)
    }

    fn render(pieces: &[Piece], obs: &Observation, envelope: &SafetyEnvelope) -> String {
        let s = obs.state.displacement.meters();
        let (lower, upper) = envelope.bounds(s);
        let mut out = String::new();
        for piece in pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => {
                    let _ = match *name {
                        "velocity" => write!(out, "{:.2}", obs.state.velocity.mps()),
                        "displacement" => write!(out, "{:.2}", s),
                        "steer" => write!(out, "{}", obs.state.steer.name()),
                        "head" => write!(out, "{}", obs.state.head.name()),
                        "envelope_lower" => write!(out, "{lower:.2}"),
                        "envelope_upper" => write!(out, "{upper:.2}"),
                        other => unreachable!("placeholder {other} validated at parse"),
                    };
                }
            }
        }
        out
    }
}

/// Data the oracle backend reasons over. Live and replay backends only see
/// the rendered text.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptContext {
    pub observation: Observation,
    pub envelope: SafetyEnvelope,
}

/// One fully rendered prompt.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptDoc {
    pub system_text: String,
    pub user_text: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub context: Option<PromptContext>,
}

impl PromptDoc {
    pub fn new(system_text: impl Into<String>, user_text: impl Into<String>) -> Self {
        Self {
            system_text: system_text.into(),
            user_text: user_text.into(),
            max_tokens: MAX_TOKENS,
            temperature: TEMPERATURE,
            context: None,
        }
    }

    /// Exact bytes that identify this prompt on the wire.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.system_text.len() + self.user_text.len() + 40);
        out.extend_from_slice(self.system_text.as_bytes());
        out.push(0);
        out.extend_from_slice(self.user_text.as_bytes());
        out.push(0);
        out.extend_from_slice(
            format!(
                "num_predict={};temperature={}",
                self.max_tokens, self.temperature
            )
            .as_bytes(),
        );
        out
    }
}

pub fn build_prompt(
    template: &PromptTemplate,
    obs: &Observation,
    envelope: &SafetyEnvelope,
) -> PromptDoc {
    PromptDoc {
        context: Some(PromptContext {
            observation: obs.clone(),
            envelope: envelope.clone(),
        }),
        ..PromptDoc::new(
            PromptTemplate::render(&template.system, obs, envelope),
            PromptTemplate::render(&template.user, obs, envelope),
        )
    }
}
