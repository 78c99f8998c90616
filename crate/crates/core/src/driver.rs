//! Scripted human driver.
//!
//! The driver follows a time-indexed behavior script and complies with
//! coach instructions through a fixed keyword table: an instruction maps
//! to a [`Directive`], and each directive patches the scripted command for
//! a hold period starting at the next perception tick.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::plant::{Accelerator, Brake, Direction, DriverCommand};
use crate::runtime::SECOND;

/// How long a directive stays in force unless replaced.
pub const DEFAULT_HOLD_NS: u64 = 2 * SECOND;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directive {
    SlowDown,
    SpeedUp,
    BrakeNow,
    CheckRight,
    SteerRight,
    SteerLeft,
    HoldSpeed,
    NoOp,
}

impl Directive {
    pub fn as_str(self) -> &'static str {
        match self {
            Directive::SlowDown => "slow-down",
            Directive::SpeedUp => "speed-up",
            Directive::BrakeNow => "brake-now",
            Directive::CheckRight => "check-right",
            Directive::SteerRight => "steer-right",
            Directive::SteerLeft => "steer-left",
            Directive::HoldSpeed => "hold-speed",
            Directive::NoOp => "no-op",
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Each rule matches when every group has at least one substring present in
/// the lower-cased instruction. Rules are tried in order.
const KEYWORDS: &[(Directive, &[&[&str]])] = &[
    (Directive::BrakeNow, &[&["brake", "braking"]]),
    (Directive::SlowDown, &[&["slow", "decelerate", "reduce"]]),
    (Directive::SpeedUp, &[&["speed up", "accelerate", "faster"]]),
    (
        Directive::CheckRight,
        &[&["check", "look", "mirror"], &["right"]],
    ),
    (
        Directive::SteerRight,
        &[&["steer", "merge", "lane", "move"], &["right"]],
    ),
    (
        Directive::SteerLeft,
        &[&["steer", "merge", "lane", "move"], &["left"]],
    ),
    (Directive::HoldSpeed, &[&["maintain", "hold", "keep"]]),
];

/// Maps free-form coach text to a directive. Unrecognized text is `NoOp`.
pub fn receive_instruction(text: &str) -> Directive {
    let lower = text.to_lowercase();
    KEYWORDS
        .iter()
        .find(|(_, groups)| {
            groups
                .iter()
                .all(|alts| alts.iter().any(|k| lower.contains(k)))
        })
        .map_or(Directive::NoOp, |(d, _)| *d)
}

/// Partial command; `None` fields keep the scripted value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandPatch {
    pub accelerator: Option<Accelerator>,
    pub brake: Option<Brake>,
    pub head: Option<Direction>,
    pub steer: Option<Direction>,
}

impl CommandPatch {
    pub fn apply(&self, mut cmd: DriverCommand) -> DriverCommand {
        if let Some(a) = self.accelerator {
            cmd.accelerator = a;
        }
        if let Some(b) = self.brake {
            cmd.brake = b;
        }
        if let Some(h) = self.head {
            cmd.head = h;
        }
        if let Some(s) = self.steer {
            cmd.steer = s;
        }
        cmd
    }
}

/// How the driver complies with each directive.
pub fn default_compliance() -> BTreeMap<Directive, CommandPatch> {
    let pedals = |accelerator, brake| CommandPatch {
        accelerator: Some(accelerator),
        brake: Some(brake),
        ..Default::default()
    };
    BTreeMap::from([
        (
            Directive::SlowDown,
            pedals(Accelerator::None, Brake::Gentle),
        ),
        (
            Directive::BrakeNow,
            pedals(Accelerator::None, Brake::Gentle),
        ),
        (
            Directive::SpeedUp,
            pedals(Accelerator::NormalAccel, Brake::None),
        ),
        (
            Directive::HoldSpeed,
            pedals(Accelerator::Cruise, Brake::None),
        ),
        (
            Directive::CheckRight,
            CommandPatch {
                head: Some(Direction::Right),
                ..Default::default()
            },
        ),
        (
            Directive::SteerRight,
            CommandPatch {
                steer: Some(Direction::Right),
                ..Default::default()
            },
        ),
        (
            Directive::SteerLeft,
            CommandPatch {
                steer: Some(Direction::Left),
                ..Default::default()
            },
        ),
        (Directive::NoOp, CommandPatch::default()),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub from_ns: u64,
    pub command: DriverCommand,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("driver script has no segments")]
    Empty,
    #[error("segment 0 must start at 0 ms, starts at {from_ns} ns")]
    LateStart { from_ns: u64 },
    #[error("segment {index} starts at {from_ns} ns, not after the previous segment")]
    Overlap { index: usize, from_ns: u64 },
}

/// Piecewise-constant driver behavior plus compliance rules.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverScript {
    segments: Vec<Segment>,
    pub compliance: BTreeMap<Directive, CommandPatch>,
    pub hold_ns: u64,
}

impl DriverScript {
    /// Segments must start at 0 and be strictly increasing in start time;
    /// the last one extends indefinitely.
    pub fn new(segments: Vec<Segment>) -> Result<Self, ScriptError> {
        let first = segments.first().ok_or(ScriptError::Empty)?;
        if first.from_ns != 0 {
            return Err(ScriptError::LateStart {
                from_ns: first.from_ns,
            });
        }
        for (i, w) in segments.windows(2).enumerate() {
            if w[1].from_ns <= w[0].from_ns {
                return Err(ScriptError::Overlap {
                    index: i + 1,
                    from_ns: w[1].from_ns,
                });
            }
        }
        Ok(Self {
            segments,
            compliance: default_compliance(),
            hold_ns: DEFAULT_HOLD_NS,
        })
    }

    pub fn constant(command: DriverCommand) -> Self {
        Self::new(vec![Segment {
            from_ns: 0,
            command,
        }])
        .expect("single segment from 0")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Scripted command at `t_ns`.
    pub fn command_at(&self, t_ns: u64) -> DriverCommand {
        let idx = self.segments.partition_point(|s| s.from_ns <= t_ns);
        self.segments[idx.saturating_sub(1)].command
    }

    pub fn patch_for(&self, directive: Directive) -> CommandPatch {
        self.compliance.get(&directive).copied().unwrap_or_default()
    }
}

/// A directive in force until `until_ns` (exclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActiveDirective {
    pub directive: Directive,
    pub until_ns: u64,
}

/// Command the driver issues at perception tick `t_ns`.
pub fn perceive_tick(
    t_ns: u64,
    script: &DriverScript,
    active: Option<&ActiveDirective>,
) -> DriverCommand {
    let scripted = script.command_at(t_ns);
    match active {
        Some(a) if t_ns < a.until_ns => script.patch_for(a.directive).apply(scripted),
        _ => scripted,
    }
}

/// Driver reactor state.
#[derive(Clone, Debug)]
pub struct Driver {
    pub script: DriverScript,
    pending: Option<Directive>,
    active: Option<ActiveDirective>,
}

impl Driver {
    pub fn new(script: DriverScript) -> Self {
        Self {
            script,
            pending: None,
            active: None,
        }
    }

    /// Queues the directive for the next perception tick. `NoOp` leaves any
    /// pending or active directive untouched.
    pub fn on_instruction(&mut self, text: &str) -> Directive {
        let directive = receive_instruction(text);
        if directive != Directive::NoOp {
            self.pending = Some(directive);
        }
        directive
    }

    pub fn on_tick(&mut self, t_ns: u64) -> DriverCommand {
        if let Some(directive) = self.pending.take() {
            self.active = Some(ActiveDirective {
                directive,
                until_ns: t_ns + self.script.hold_ns,
            });
        }
        if self.active.is_some_and(|a| t_ns >= a.until_ns) {
            self.active = None;
        }
        perceive_tick(t_ns, &self.script, self.active.as_ref())
    }

    pub fn active(&self) -> Option<&ActiveDirective> {
        self.active.as_ref()
    }
}
