//! Driving scenarios: safety envelopes, the envelope classifier, lane
//! bookkeeping and per-run success criteria.

mod load;

pub use load::{
    builtin, builtin_ids, load_scenario, parse_scenario, resolve, ScenarioError, ScenarioSpec,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coach::ControlSignal;
use crate::config::RECOVERABLE_MARGIN_MPS;
use crate::plant::{CarState, Direction};
use crate::runtime::{MS, SECOND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    StopSign,
    SpeedChange,
    LaneChange,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::StopSign,
        ScenarioKind::SpeedChange,
        ScenarioKind::LaneChange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::StopSign => "stop-sign",
            ScenarioKind::SpeedChange => "speed-change",
            ScenarioKind::LaneChange => "lane-change",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Displacement-indexed velocity band.
#[derive(Clone, Debug, PartialEq)]
pub struct SafetyEnvelope {
    pub kind: ScenarioKind,
    pub course_length_m: f64,
    pub v0_mps: f64,
    /// Desirable velocity at the end of the course.
    pub target_mps: f64,
    pub band_mps: f64,
}

impl SafetyEnvelope {
    /// Desirable velocity at displacement `s_m`.
    ///
    /// Stop sign: constant deceleration to rest at the course end.
    /// Speed change: linear ramp to the target, then constant.
    /// Lane change: constant initial velocity.
    pub fn desirable(&self, s_m: f64) -> f64 {
        let s = s_m.max(0.0);
        let len = self.course_length_m;
        match self.kind {
            ScenarioKind::StopSign => self.v0_mps * (1.0 - s / len).max(0.0).sqrt(),
            ScenarioKind::SpeedChange if s >= len => self.target_mps,
            ScenarioKind::SpeedChange => self.v0_mps + (self.target_mps - self.v0_mps) * (s / len),
            ScenarioKind::LaneChange => self.v0_mps,
        }
    }

    /// `(lower, upper)`; the lower bound is clamped at zero.
    pub fn bounds(&self, s_m: f64) -> (f64, f64) {
        let vd = self.desirable(s_m);
        ((vd - self.band_mps).max(0.0), vd + self.band_mps)
    }

    /// Zone of a velocity by its deviation from the desirable velocity.
    pub fn velocity_zone(&self, s_m: f64, v_mps: f64) -> ControlSignal {
        let d = (v_mps - self.desirable(s_m)).abs();
        if d <= self.band_mps {
            ControlSignal::None
        } else if d <= self.band_mps + RECOVERABLE_MARGIN_MPS {
            ControlSignal::Warning
        } else {
            ControlSignal::Actuate
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Lane {
    #[default]
    Left,
    Right,
}

impl Lane {
    pub fn as_str(self) -> &'static str {
        match self {
            Lane::Left => "left",
            Lane::Right => "right",
        }
    }
}

/// Steering must be held this long to change lane.
pub const LANE_CHANGE_HOLD_NS: u64 = 500 * MS;
/// A head check counts for this long after it is observed.
pub const HEAD_CHECK_WINDOW_NS: u64 = SECOND;

/// Discrete lane membership and head-check memory, updated per perception
/// tick from the car state.
#[derive(Clone, Debug, Default)]
pub struct LaneTracker {
    lane: Lane,
    steer_since: Option<(Direction, u64)>,
    last_head_right_ns: Option<u64>,
}

impl LaneTracker {
    pub fn new(lane: Lane) -> Self {
        Self {
            lane,
            ..Self::default()
        }
    }

    pub fn lane(&self) -> Lane {
        self.lane
    }

    /// Returns the lane and whether a right head check lies within the
    /// window ending at `t_ns`.
    pub fn observe(&mut self, t_ns: u64, state: &CarState) -> (Lane, bool) {
        if state.head == Direction::Right {
            self.last_head_right_ns = Some(t_ns);
        }
        let since = match self.steer_since {
            Some((dir, since)) if dir == state.steer => since,
            _ => t_ns,
        };
        self.steer_since = Some((state.steer, since));
        if t_ns - since >= LANE_CHANGE_HOLD_NS {
            match state.steer {
                Direction::Right => self.lane = Lane::Right,
                Direction::Left => self.lane = Lane::Left,
                Direction::Center => {}
            }
        }
        let checked = self
            .last_head_right_ns
            .is_some_and(|h| t_ns - h <= HEAD_CHECK_WINDOW_NS);
        (self.lane, checked)
    }
}

/// What the coach perceives at one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub state: CarState,
    pub lane: Lane,
    pub head_checked: bool,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} lane={} checked={}",
            self.state,
            self.lane.as_str(),
            self.head_checked
        )
    }
}

/// Reason behind a classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cause {
    OnTrack,
    TooFast,
    TooSlow,
    NoHeadCheck,
    MissedLane,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assessment {
    pub signal: ControlSignal,
    pub cause: Cause,
    /// Signed `v - v_d`.
    pub deviation_mps: f64,
    pub desirable_mps: f64,
}

/// Envelope classifier. On equal severity a lane rule wins over the
/// velocity rule.
pub fn assess(envelope: &SafetyEnvelope, obs: &Observation) -> Assessment {
    let s = obs.state.displacement.meters();
    let v = obs.state.velocity.mps();
    let vd = envelope.desirable(s);
    let signal = envelope.velocity_zone(s, v);
    let mut out = Assessment {
        signal,
        cause: match signal {
            ControlSignal::None => Cause::OnTrack,
            _ if v > vd => Cause::TooFast,
            _ => Cause::TooSlow,
        },
        deviation_mps: v - vd,
        desirable_mps: vd,
    };
    if envelope.kind == ScenarioKind::LaneChange {
        let lane_rule = if obs.lane == Lane::Left && s >= envelope.course_length_m {
            Some((ControlSignal::Actuate, Cause::MissedLane))
        } else if obs.state.steer == Direction::Right && !obs.head_checked {
            Some((ControlSignal::Warning, Cause::NoHeadCheck))
        } else {
            None
        };
        if let Some((signal, cause)) = lane_rule {
            if signal >= out.signal {
                out.signal = signal;
                out.cause = cause;
            }
        }
    }
    out
}

pub fn classify(envelope: &SafetyEnvelope, obs: &Observation) -> ControlSignal {
    assess(envelope, obs).signal
}

/// One per-tick record of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub time_ns: u64,
    pub state: CarState,
    pub lane: Lane,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Stop velocity for the stop-sign check, m/s.
pub const STOP_VELOCITY_MPS: f64 = 0.5;
/// Half width of the stopping window around the course end, m.
pub const STOP_WINDOW_M: f64 = 5.0;
/// Tolerance on the target velocity at the course end, m/s.
pub const TARGET_TOLERANCE_MPS: f64 = 1.0;

/// Velocity at displacement `s_m`, interpolated linearly between the two
/// samples that bracket it.
pub fn velocity_at(samples: &[Sample], s_m: f64) -> Option<f64> {
    samples.windows(2).find_map(|w| {
        let (s0, s1) = (
            w[0].state.displacement.meters(),
            w[1].state.displacement.meters(),
        );
        let (v0, v1) = (w[0].state.velocity.mps(), w[1].state.velocity.mps());
        if s0 <= s_m && s_m <= s1 {
            Some(if s1 == s0 {
                v0
            } else {
                v0 + (v1 - v0) * (s_m - s0) / (s1 - s0)
            })
        } else {
            None
        }
    })
}

/// Success criteria for one run.
pub fn evaluate(envelope: &SafetyEnvelope, samples: &[Sample]) -> Outcome {
    let end = envelope.course_length_m;
    let checks = match envelope.kind {
        ScenarioKind::StopSign => {
            let stop = samples.iter().find(|x| {
                let s = x.state.displacement.meters();
                (end - STOP_WINDOW_M..=end + STOP_WINDOW_M).contains(&s)
                    && x.state.velocity.mps() <= STOP_VELOCITY_MPS
            });
            let min_v = samples
                .iter()
                .filter(|x| {
                    (end - STOP_WINDOW_M..=end + STOP_WINDOW_M)
                        .contains(&x.state.displacement.meters())
                })
                .map(|x| x.state.velocity.mps())
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
            let final_s = samples
                .last()
                .map_or(0.0, |x| x.state.displacement.meters());
            vec![Check {
                name: "stop",
                passed: stop.is_some(),
                detail: match (stop, min_v) {
                    (Some(x), _) => format!(
                        "v={:.2} m/s at s={:.2} m, t={:.1} s",
                        x.state.velocity.mps(),
                        x.state.displacement.meters(),
                        x.time_ns as f64 / 1e9
                    ),
                    (None, Some(v)) => format!("min v={v:.2} m/s within the stop window"),
                    (None, None) => {
                        format!("never entered the stop window (final s={final_s:.2} m)")
                    }
                },
            }]
        }
        ScenarioKind::SpeedChange => {
            let v = velocity_at(samples, end);
            vec![Check {
                name: "target-speed",
                passed: v.is_some_and(|v| (v - envelope.target_mps).abs() <= TARGET_TOLERANCE_MPS),
                detail: match v {
                    Some(v) => format!(
                        "v={v:.2} m/s at s={end:.0} m (target {:.2})",
                        envelope.target_mps
                    ),
                    None => format!("never reached s={end:.0} m"),
                },
            }]
        }
        ScenarioKind::LaneChange => {
            let changed = samples
                .iter()
                .find(|x| x.lane == Lane::Right && x.state.displacement.meters() <= end);
            let worst = samples
                .iter()
                .map(|x| (x.state.velocity.mps() - envelope.target_mps).abs())
                .fold(0.0_f64, f64::max);
            vec![
                Check {
                    name: "right-lane",
                    passed: changed.is_some(),
                    detail: match changed {
                        Some(x) => {
                            format!("right lane at s={:.2} m", x.state.displacement.meters())
                        }
                        None => format!("not in the right lane by s={end:.0} m"),
                    },
                },
                Check {
                    name: "hold-speed",
                    passed: worst <= envelope.band_mps,
                    detail: format!("max |v - {:.0}|={worst:.2} m/s", envelope.target_mps),
                },
            ]
        }
    };
    Outcome { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{Displacement, Velocity};

    fn stop_sign() -> SafetyEnvelope {
        SafetyEnvelope {
            kind: ScenarioKind::StopSign,
            course_length_m: 100.0,
            v0_mps: 10.0,
            target_mps: 0.0,
            band_mps: 2.0,
        }
    }

    fn obs(s: f64, v: f64) -> Observation {
        Observation {
            state: CarState {
                velocity: Velocity::from_mps(v),
                displacement: Displacement::from_meters(s),
                ..Default::default()
            },
            lane: Lane::Left,
            head_checked: false,
        }
    }

    #[test]
    fn stop_sign_profile() {
        let e = stop_sign();
        assert_eq!(e.desirable(0.0), 10.0);
        assert_eq!(e.desirable(75.0), 5.0);
        assert_eq!(e.desirable(100.0), 0.0);
        assert_eq!(e.desirable(130.0), 0.0);
        assert_eq!(e.bounds(0.0), (8.0, 12.0));
        assert_eq!(e.bounds(100.0), (0.0, 2.0));
    }

    #[test]
    fn classification() {
        let e = stop_sign();
        assert_eq!(classify(&e, &obs(0.0, 10.0)), ControlSignal::None);
        let a = assess(&e, &obs(50.0, 10.0));
        assert_eq!(
            (a.signal, a.cause),
            (ControlSignal::Warning, Cause::TooFast)
        );
        assert!((a.deviation_mps - 2.9289).abs() < 1e-4);
        assert_eq!(classify(&e, &obs(75.0, 10.0)), ControlSignal::Actuate);
        assert_eq!(assess(&e, &obs(0.0, 6.5)).cause, Cause::TooSlow);
    }

    #[test]
    fn lane_tracking() {
        let mut t = LaneTracker::new(Lane::Left);
        let mut st = CarState {
            steer: Direction::Right,
            ..Default::default()
        };
        assert_eq!(t.observe(1000 * MS, &st), (Lane::Left, false));
        assert_eq!(t.observe(1400 * MS, &st).0, Lane::Left);
        assert_eq!(t.observe(1500 * MS, &st).0, Lane::Right);
        st.head = Direction::Right;
        assert_eq!(t.observe(1600 * MS, &st), (Lane::Right, true));
        st.head = Direction::Center;
        assert!(t.observe(2600 * MS, &st).1);
        assert!(!t.observe(2700 * MS, &st).1);
    }

    #[test]
    fn interpolated_velocity() {
        let at = |t: u64, s: f64, v: f64| Sample {
            time_ns: t,
            state: obs(s, v).state,
            lane: Lane::Left,
        };
        let samples = [at(0, 99.0, 12.0), at(1, 101.0, 10.0)];
        assert_eq!(velocity_at(&samples, 100.0), Some(11.0));
        assert_eq!(velocity_at(&samples, 102.0), None);
    }
}
