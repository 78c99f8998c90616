use coachsim_core::config::PERCEPTION_PERIOD_NS;
use coachsim_core::plant::{
    command_to_accel, plant_react, step_displacement, step_velocity, Accelerator, Actuation, Brake,
    CarState, Direction, DriverCommand, StepParams,
};
use coachsim_core::units::{Acceleration, Displacement, Velocity};
use proptest::prelude::*;

const DT: u64 = PERCEPTION_PERIOD_NS;

/// Constant a = -0.5 m/s² from 10 m/s for 20 s. In µm units the closed form
/// is v = 10e6 - 50_000 n and s = 1e6 n - 2500 n², and forward Euler
/// overshoots s by ½|a|·t·dt = 2500 n µm.
#[test]
fn constant_deceleration_matches_closed_form() {
    let params = StepParams {
        accel: Acceleration::from_mps2(-0.5),
        dt_ns: DT,
    };
    let (mut v, mut s) = (Velocity::from_mps(10.0), Displacement::ZERO);
    for n in 1..=200i64 {
        let next_v = step_velocity(v, params);
        s = step_displacement(s, v, DT);
        v = next_v;
        assert_eq!(v.micros(), 10_000_000 - 50_000 * n, "velocity at step {n}");
        let exact_s = 1_000_000 * n - 2_500 * n * n;
        assert_eq!(s.micros() - exact_s, 2_500 * n, "Euler bias at step {n}");
    }
    assert_eq!(v, Velocity::ZERO);
    let err = s.meters() - (10.0 * 20.0 - 0.5 * 0.5 * 20.0 * 20.0);
    assert!((err - 0.5).abs() < 1e-9, "displacement error {err}");
}

#[test]
fn one_step_examples() {
    let step = |v: f64, a: f64| {
        step_velocity(
            Velocity::from_mps(v),
            StepParams {
                accel: Acceleration::from_mps2(a),
                dt_ns: DT,
            },
        )
        .mps()
    };
    assert_eq!(step(10.0, -3.0), 9.7);
    assert_eq!(step(10.0, 0.0), 10.0);
    assert_eq!(step(0.5, -9.0), 0.0);
}

fn accelerator() -> impl Strategy<Value = Accelerator> {
    prop_oneof![
        Just(Accelerator::Coasting),
        Just(Accelerator::Cruise),
        Just(Accelerator::NormalAccel),
        Just(Accelerator::StrongAccel),
        Just(Accelerator::None),
    ]
}

fn brake() -> impl Strategy<Value = Brake> {
    prop_oneof![
        Just(Brake::Gentle),
        Just(Brake::Emergency),
        Just(Brake::None)
    ]
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![
        Just(Direction::Left),
        Just(Direction::Right),
        Just(Direction::Center)
    ]
}

fn command() -> impl Strategy<Value = DriverCommand> {
    (accelerator(), brake(), direction(), direction()).prop_map(
        |(accelerator, brake, head, steer)| DriverCommand {
            accelerator,
            brake,
            head,
            steer,
        },
    )
}

proptest! {
    #[test]
    fn velocity_never_negative_and_displacement_nondecreasing(
        v0 in 0i64..40_000_000,
        steps in prop::collection::vec((command(), any::<bool>()), 1..300),
    ) {
        let mut state = CarState::at_rest_with(Velocity::from_micros(v0));
        for (cmd, act) in steps {
            let next = plant_react(&cmd, act.then_some(Actuation::EmergencyBrake), &state, DT);
            prop_assert!(next.velocity >= Velocity::ZERO);
            prop_assert!(next.displacement >= state.displacement);
            prop_assert_eq!((next.steer, next.head), (cmd.steer, cmd.head));
            state = next;
        }
    }

    #[test]
    fn actuation_dominates_driver(cmd in command(), v0 in 0i64..40_000_000) {
        let state = CarState::at_rest_with(Velocity::from_micros(v0));
        let emergency = DriverCommand { accelerator: Accelerator::None, brake: Brake::Emergency, ..cmd };
        let overridden = plant_react(&cmd, Some(Actuation::EmergencyBrake), &state, DT);
        prop_assert_eq!(overridden.velocity, plant_react(&emergency, None, &state, DT).velocity);
    }

    #[test]
    fn brake_overrides_accelerator(a in accelerator(), b in brake()) {
        let got = command_to_accel(&DriverCommand { accelerator: a, brake: b, ..Default::default() });
        match b.acceleration() {
            Some(braking) => prop_assert_eq!(got, braking),
            None => prop_assert_eq!(got, a.acceleration()),
        }
    }

    #[test]
    fn plant_is_pure(cmd in command(), v0 in 0i64..40_000_000, s0 in 0i64..1_000_000_000) {
        let state = CarState {
            velocity: Velocity::from_micros(v0),
            displacement: Displacement::from_micros(s0),
            ..Default::default()
        };
        prop_assert_eq!(plant_react(&cmd, None, &state, DT), plant_react(&cmd, None, &state, DT));
    }
}
