use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{SafetyEnvelope, ScenarioKind};
use crate::coach::{PromptTemplate, TemplateError};
use crate::config::{
    DEFAULT_BAND_MPS, DEFAULT_DEADLINE_NS, DEFAULT_HORIZON_NS, PERCEPTION_PERIOD_NS,
};
use crate::driver::{
    default_compliance, CommandPatch, Directive, DriverScript, ScriptError, Segment,
};
use crate::plant::{Accelerator, Brake, Direction, DriverCommand};
use crate::runtime::{MS, SECOND};
use crate::units::Velocity;

const BUILTIN_SCENARIOS: [(&str, &str); 3] = [
    ("stop-sign", include_str!("../../scenarios/stop_sign.toml")),
    (
        "speed-change",
        include_str!("../../scenarios/speed_change.toml"),
    ),
    (
        "lane-change",
        include_str!("../../scenarios/lane_change.toml"),
    ),
];

const BUILTIN_TEMPLATES: [(&str, &str); 3] = [
    (
        "stop_sign.prompt",
        include_str!("../../scenarios/stop_sign.prompt"),
    ),
    (
        "speed_change.prompt",
        include_str!("../../scenarios/speed_change.prompt"),
    ),
    (
        "lane_change.prompt",
        include_str!("../../scenarios/lane_change.prompt"),
    ),
];

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("`{field}` {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("`driver.segments[{index}]`: {reason}")]
    Segment { index: usize, reason: String },
    #[error("prompt template {name}: {source}")]
    Template { name: String, source: TemplateError },
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenario: ScenarioKind,
    name: Option<String>,
    course_length_m: f64,
    initial_velocity_mps: f64,
    target_velocity_mps: Option<f64>,
    band_halfwidth_mps: Option<f64>,
    deadline_ms: Option<u64>,
    horizon_s: Option<u64>,
    prompt_template: Option<String>,
    actuation_hold_ms: Option<u64>,
    driver: DriverFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DriverFile {
    hold_ms: Option<u64>,
    segments: Vec<SegmentFile>,
    #[serde(default)]
    compliance: BTreeMap<Directive, CommandPatch>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    at_ms: u64,
    #[serde(default)]
    accelerator: Accelerator,
    #[serde(default)]
    brake: Brake,
    #[serde(default)]
    head: Direction,
    #[serde(default)]
    steer: Direction,
}

/// A fully loaded scenario. Immutable after load.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub name: String,
    pub course_length_m: f64,
    pub v0: Velocity,
    pub target_mps: f64,
    pub band_mps: f64,
    pub script: DriverScript,
    pub template: PromptTemplate,
    pub deadline_ns: u64,
    pub horizon_ns: u64,
    /// How long one coach actuation overrides the pedals.
    pub actuation_hold_ns: u64,
}

impl ScenarioSpec {
    pub fn envelope(&self) -> SafetyEnvelope {
        SafetyEnvelope {
            kind: self.kind,
            course_length_m: self.course_length_m,
            v0_mps: self.v0.mps(),
            target_mps: self.target_mps,
            band_mps: self.band_mps,
        }
    }
}

fn positive(field: &'static str, value: f64) -> Result<f64, ScenarioError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::Invalid {
            field,
            reason: format!("must be positive, got {value}"),
        })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<f64, ScenarioError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::Invalid {
            field,
            reason: format!("must be non-negative, got {value}"),
        })
    }
}

fn nonzero_ms(field: &'static str, ms: u64) -> Result<u64, ScenarioError> {
    if ms == 0 {
        return Err(ScenarioError::Invalid {
            field,
            reason: "must be positive".into(),
        });
    }
    ms.checked_mul(MS).ok_or(ScenarioError::Invalid {
        field,
        reason: "out of range".into(),
    })
}

fn load_template(name: &str, base_dir: Option<&Path>) -> Result<PromptTemplate, ScenarioError> {
    let text = match base_dir {
        Some(dir) => {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io { path, source })?
        }
        None => BUILTIN_TEMPLATES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| (*t).to_owned())
            .ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_owned()))?,
    };
    PromptTemplate::parse(&text).map_err(|source| ScenarioError::Template {
        name: name.to_owned(),
        source,
    })
}

fn default_template(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::StopSign => "stop_sign.prompt",
        ScenarioKind::SpeedChange => "speed_change.prompt",
        ScenarioKind::LaneChange => "lane_change.prompt",
    }
}

/// Parses scenario text. Template paths resolve against `base_dir`; with no
/// base directory they name bundled templates.
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<ScenarioSpec, ScenarioError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
    let file: ScenarioFile =
        serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Schema {
            path: e.path().to_string(),
            message: e.inner().message().trim().to_owned(),
        })?;

    let course_length_m = positive("course_length_m", file.course_length_m)?;
    let v0_mps = non_negative("initial_velocity_mps", file.initial_velocity_mps)?;
    let target_mps = match (file.scenario, file.target_velocity_mps) {
        (_, Some(t)) => non_negative("target_velocity_mps", t)?,
        (ScenarioKind::StopSign, None) => 0.0,
        (ScenarioKind::LaneChange, None) => v0_mps,
        (ScenarioKind::SpeedChange, None) => {
            return Err(ScenarioError::Invalid {
                field: "target_velocity_mps",
                reason: "is required for speed-change".into(),
            })
        }
    };
    let band_mps = positive(
        "band_halfwidth_mps",
        file.band_halfwidth_mps.unwrap_or(DEFAULT_BAND_MPS),
    )?;
    let deadline_ns = match file.deadline_ms {
        Some(ms) => nonzero_ms("deadline_ms", ms)?,
        None => DEFAULT_DEADLINE_NS,
    };
    let horizon_ns = match file.horizon_s {
        Some(0) => {
            return Err(ScenarioError::Invalid {
                field: "horizon_s",
                reason: "must be positive".into(),
            })
        }
        Some(s) => s.saturating_mul(SECOND),
        None => DEFAULT_HORIZON_NS,
    };
    let actuation_hold_ns = match file.actuation_hold_ms {
        Some(ms) => nonzero_ms("actuation_hold_ms", ms)?,
        None => PERCEPTION_PERIOD_NS,
    };

    let segments = file
        .driver
        .segments
        .iter()
        .map(|s| Segment {
            from_ns: s.at_ms.saturating_mul(MS),
            command: DriverCommand {
                accelerator: s.accelerator,
                brake: s.brake,
                head: s.head,
                steer: s.steer,
            },
        })
        .collect();
    let mut script = DriverScript::new(segments).map_err(|e| match e {
        ScriptError::Empty => ScenarioError::Invalid {
            field: "driver.segments",
            reason: "must not be empty".into(),
        },
        ScriptError::LateStart { .. } => ScenarioError::Segment {
            index: 0,
            reason: "must start at 0 ms".into(),
        },
        ScriptError::Overlap { index, .. } => ScenarioError::Segment {
            index,
            reason: format!(
                "starts at {} ms, not after segment {} at {} ms",
                file.driver.segments[index].at_ms,
                index - 1,
                file.driver.segments[index - 1].at_ms
            ),
        },
    })?;
    let mut compliance = default_compliance();
    compliance.extend(file.driver.compliance);
    script.compliance = compliance;
    if let Some(ms) = file.driver.hold_ms {
        script.hold_ns = nonzero_ms("driver.hold_ms", ms)?;
    }

    let template_name = file
        .prompt_template
        .unwrap_or_else(|| default_template(file.scenario).to_owned());
    let template = load_template(&template_name, base_dir)?;

    Ok(ScenarioSpec {
        kind: file.scenario,
        name: file.name.unwrap_or_else(|| file.scenario.to_string()),
        course_length_m,
        v0: Velocity::from_mps(v0_mps),
        target_mps,
        band_mps,
        script,
        template,
        deadline_ns,
        horizon_ns,
        actuation_hold_ns,
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_scenario(&text, Some(path.parent().unwrap_or(Path::new("."))))
}

pub fn builtin_ids() -> impl Iterator<Item = &'static str> {
    BUILTIN_SCENARIOS.iter().map(|(id, _)| *id)
}

pub fn builtin(id: &str) -> Result<ScenarioSpec, ScenarioError> {
    let (_, text) = BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == id)
        .ok_or_else(|| ScenarioError::UnknownBuiltin(id.to_owned()))?;
    parse_scenario(text, None)
}

/// A bundled scenario id, or else a path to a scenario file.
pub fn resolve(name_or_path: &str) -> Result<ScenarioSpec, ScenarioError> {
    if builtin_ids().any(|id| id == name_or_path) {
        builtin(name_or_path)
    } else {
        load_scenario(Path::new(name_or_path))
    }
}
