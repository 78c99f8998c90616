//! Car and environment kinematics.
//!
//! The driver's pedal behavior is discrete: each accelerator or brake
//! behavior maps to one fixed net acceleration. Velocity and displacement
//! are integrated with forward Euler on the perception period; displacement
//! uses the velocity from before the update.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::units::{Acceleration, Displacement, Velocity};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accelerator {
    Coasting,
    Cruise,
    NormalAccel,
    StrongAccel,
    #[default]
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Brake {
    Gentle,
    Emergency,
    #[default]
    None,
}

/// Head orientation or steering position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Left,
    Right,
    #[default]
    Center,
}

impl Accelerator {
    pub fn as_str(self) -> &'static str {
        match self {
            Accelerator::Coasting => "coasting",
            Accelerator::Cruise => "cruise",
            Accelerator::NormalAccel => "normal-accel",
            Accelerator::StrongAccel => "strong-accel",
            Accelerator::None => "none",
        }
    }

    pub const fn acceleration(self) -> Acceleration {
        Acceleration::from_micros(match self {
            Accelerator::Coasting => -100_000,
            Accelerator::Cruise => 100_000,
            Accelerator::NormalAccel => 2_000_000,
            Accelerator::StrongAccel => 4_000_000,
            Accelerator::None => 0,
        })
    }
}

impl Brake {
    pub fn as_str(self) -> &'static str {
        match self {
            Brake::Gentle => "gentle",
            Brake::Emergency => "emergency",
            Brake::None => "none",
        }
    }

    pub const fn acceleration(self) -> Option<Acceleration> {
        match self {
            Brake::Gentle => Some(Acceleration::from_micros(-3_000_000)),
            Brake::Emergency => Some(Acceleration::from_micros(-9_000_000)),
            Brake::None => None,
        }
    }
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Center => "center",
        }
    }

    /// Capitalized enumeration name, as shown to the language model.
    pub fn name(self) -> &'static str {
        match self {
            Direction::Left => "Left",
            Direction::Right => "Right",
            Direction::Center => "Center",
        }
    }
}

/// One discrete driver behavior sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DriverCommand {
    #[serde(default)]
    pub accelerator: Accelerator,
    #[serde(default)]
    pub brake: Brake,
    #[serde(default)]
    pub head: Direction,
    #[serde(default)]
    pub steer: Direction,
}

impl fmt::Display for DriverCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accel={} brake={} head={} steer={}",
            self.accelerator.as_str(),
            self.brake.as_str(),
            self.head.as_str(),
            self.steer.as_str()
        )
    }
}

/// Net acceleration for a driver command. A pressed brake overrides the
/// accelerator.
pub fn command_to_accel(cmd: &DriverCommand) -> Acceleration {
    cmd.brake
        .acceleration()
        .unwrap_or_else(|| cmd.accelerator.acceleration())
}

/// Coach-side intervention on the car.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Actuation {
    EmergencyBrake,
}

impl Actuation {
    pub fn acceleration(self) -> Acceleration {
        match self {
            Actuation::EmergencyBrake => Brake::Emergency.acceleration().expect("braking"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepParams {
    pub accel: Acceleration,
    pub dt_ns: u64,
}

/// `max(0, v + a·Δt)`.
pub fn step_velocity(v: Velocity, params: StepParams) -> Velocity {
    assert!(params.dt_ns > 0, "step must advance time");
    (v + params.accel.over(params.dt_ns)).max(Velocity::ZERO)
}

/// `s + v·Δt`, with `v` the velocity before this step's update.
pub fn step_displacement(s: Displacement, v: Velocity, dt_ns: u64) -> Displacement {
    assert!(dt_ns > 0, "step must advance time");
    s + v.over(dt_ns)
}

/// Ground-truth car state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CarState {
    pub velocity: Velocity,
    pub displacement: Displacement,
    pub steer: Direction,
    pub head: Direction,
}

impl CarState {
    pub fn at_rest_with(velocity: Velocity) -> Self {
        Self {
            velocity,
            ..Self::default()
        }
    }
}

impl fmt::Display for CarState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "v={} s={} steer={} head={}",
            self.velocity,
            self.displacement,
            self.steer.as_str(),
            self.head.as_str()
        )
    }
}

/// Advances the car by one step. A coach actuation replaces the driver's
/// pedals; steering and head position always come from the driver.
pub fn plant_react(
    cmd: &DriverCommand,
    actuation: Option<Actuation>,
    state: &CarState,
    dt_ns: u64,
) -> CarState {
    let accel = match actuation {
        Some(act) => act.acceleration(),
        None => command_to_accel(cmd),
    };
    CarState {
        velocity: step_velocity(state.velocity, StepParams { accel, dt_ns }),
        displacement: step_displacement(state.displacement, state.velocity, dt_ns),
        steer: cmd.steer,
        head: cmd.head,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: u64 = 100_000_000;

    fn cmd(accelerator: Accelerator, brake: Brake) -> DriverCommand {
        DriverCommand {
            accelerator,
            brake,
            ..Default::default()
        }
    }

    #[test]
    fn behavior_table() {
        let a = |acc, br| command_to_accel(&cmd(acc, br)).mps2();
        assert_eq!(a(Accelerator::StrongAccel, Brake::None), 4.0);
        assert_eq!(a(Accelerator::NormalAccel, Brake::None), 2.0);
        assert_eq!(a(Accelerator::Cruise, Brake::None), 0.1);
        assert_eq!(a(Accelerator::Coasting, Brake::None), -0.1);
        assert_eq!(a(Accelerator::None, Brake::Gentle), -3.0);
        assert_eq!(a(Accelerator::NormalAccel, Brake::Emergency), -9.0);
        assert_eq!(a(Accelerator::None, Brake::None), 0.0);
    }

    #[test]
    fn velocity_step() {
        let step = |v: f64, a: f64| {
            step_velocity(
                Velocity::from_mps(v),
                StepParams {
                    accel: Acceleration::from_mps2(a),
                    dt_ns: DT,
                },
            )
        };
        assert_eq!(step(10.0, -3.0), Velocity::from_mps(9.7));
        assert_eq!(step(10.0, 0.0), Velocity::from_mps(10.0));
        assert_eq!(step(0.5, -9.0), Velocity::ZERO);
    }

    #[test]
    fn displacement_step() {
        let v = Velocity::from_mps(10.0);
        assert_eq!(
            step_displacement(Displacement::ZERO, v, DT),
            Displacement::from_meters(1.0)
        );
        assert_eq!(
            step_displacement(Displacement::from_meters(42.0), Velocity::ZERO, DT),
            Displacement::from_meters(42.0)
        );
        let s = (0..10).fold(Displacement::ZERO, |s, _| step_displacement(s, v, DT));
        assert_eq!(s, Displacement::from_meters(10.0));
    }

    #[test]
    fn actuation_overrides_driver() {
        let state = CarState::at_rest_with(Velocity::from_mps(10.0));
        let next = plant_react(
            &cmd(Accelerator::StrongAccel, Brake::None),
            Some(Actuation::EmergencyBrake),
            &state,
            DT,
        );
        assert_eq!(next.velocity, Velocity::from_mps(9.1));
    }

    #[test]
    fn cruise_step() {
        let state = CarState {
            displacement: Displacement::from_meters(3.0),
            ..CarState::at_rest_with(Velocity::from_mps(10.0))
        };
        let mut c = cmd(Accelerator::Cruise, Brake::None);
        c.steer = Direction::Right;
        let next = plant_react(&c, None, &state, DT);
        assert_eq!(next.velocity, Velocity::from_mps(10.01));
        assert_eq!(next.displacement, Displacement::from_meters(4.0));
        assert_eq!(next.steer, Direction::Right);
        assert_eq!(next.head, Direction::Center);
    }
}
