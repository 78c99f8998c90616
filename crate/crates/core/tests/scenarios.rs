use std::fs;

use coachsim_core::coach::ControlSignal;
use coachsim_core::config::DEFAULT_DEADLINE_NS;
use coachsim_core::plant::{CarState, Direction};
use coachsim_core::runtime::{MS, SECOND};
use coachsim_core::scenarios::{
    builtin, classify, load_scenario, parse_scenario, Lane, Observation, SafetyEnvelope,
    ScenarioError, ScenarioKind,
};
use coachsim_core::units::{Displacement, Velocity};
use proptest::prelude::*;

fn obs(s: f64, v: f64, steer: Direction, head_checked: bool, lane: Lane) -> Observation {
    Observation {
        state: CarState {
            velocity: Velocity::from_mps(v),
            displacement: Displacement::from_meters(s),
            steer,
            head: Direction::Center,
        },
        lane,
        head_checked,
    }
}

fn envelope(id: &str) -> SafetyEnvelope {
    builtin(id).unwrap().envelope()
}

#[test]
fn bundled_stop_sign() {
    let spec = builtin("stop-sign").unwrap();
    assert_eq!(spec.kind, ScenarioKind::StopSign);
    assert_eq!(spec.course_length_m, 100.0);
    assert_eq!(spec.v0, Velocity::from_mps(10.0));
    assert_eq!(spec.deadline_ns, DEFAULT_DEADLINE_NS);
    assert_eq!(spec.band_mps, 2.0);
}

#[test]
fn envelope_endpoints() {
    let stop = envelope("stop-sign");
    assert_eq!(stop.desirable(0.0), 10.0);
    assert_eq!(stop.desirable(75.0), 5.0);
    assert_eq!(stop.desirable(100.0), 0.0);
    let change = envelope("speed-change");
    assert_eq!(change.desirable(0.0), 18.0);
    assert_eq!(change.desirable(100.0), 11.0);
    assert_eq!(change.desirable(150.0), 11.0);
    assert_eq!(envelope("lane-change").desirable(60.0), 18.0);
}

#[test]
fn classify_examples() {
    let c = Direction::Center;
    assert_eq!(
        classify(
            &envelope("stop-sign"),
            &obs(0.0, 10.0, c, false, Lane::Left)
        ),
        ControlSignal::None
    );
    assert_eq!(
        classify(
            &envelope("stop-sign"),
            &obs(50.0, 10.0, c, false, Lane::Left)
        ),
        ControlSignal::Warning
    );
    assert_eq!(
        classify(
            &envelope("speed-change"),
            &obs(100.0, 18.0, c, false, Lane::Left)
        ),
        ControlSignal::Actuate
    );
    let lane = envelope("lane-change");
    let r = Direction::Right;
    assert_eq!(
        classify(&lane, &obs(40.0, 18.0, r, true, Lane::Left)),
        ControlSignal::None
    );
    assert_eq!(
        classify(&lane, &obs(40.0, 18.0, r, false, Lane::Left)),
        ControlSignal::Warning
    );
    assert_eq!(
        classify(&lane, &obs(100.0, 18.0, c, false, Lane::Left)),
        ControlSignal::Actuate
    );
    assert_eq!(
        classify(&lane, &obs(100.0, 18.0, c, false, Lane::Right)),
        ControlSignal::None
    );
}

proptest! {
    #[test]
    fn bounds_ordered_and_profiles_nonincreasing(s in 0.0f64..100.0, ds in 0.0f64..50.0) {
        for id in ["stop-sign", "speed-change", "lane-change"] {
            let e = envelope(id);
            let (lo, hi) = e.bounds(s);
            prop_assert!(hi >= lo && lo >= 0.0);
            prop_assert!(e.desirable(s) >= 0.0);
            if id != "lane-change" {
                prop_assert!(e.desirable((s + ds).min(100.0)) <= e.desirable(s));
            }
        }
    }

    /// Zones grow with deviation on either side of the desirable velocity.
    #[test]
    fn zones_by_deviation(s in 0.0f64..100.0, d in -8.0f64..8.0) {
        let e = envelope("speed-change");
        let v = e.desirable(s) + d;
        let got = classify(&e, &obs(s, v, Direction::Center, false, Lane::Left));
        let dev = (Velocity::from_mps(v).mps() - e.desirable(s)).abs();
        let expect = if dev <= 2.0 { ControlSignal::None } else if dev <= 4.0 { ControlSignal::Warning } else { ControlSignal::Actuate };
        prop_assert_eq!(got, expect);
    }
}

const MINIMAL: &str = r#"
scenario = "stop-sign"
course_length_m = 100.0
initial_velocity_mps = 10.0

[driver]
[[driver.segments]]
at_ms = 0
accelerator = "cruise"
"#;

#[test]
fn defaults_applied() {
    let spec = parse_scenario(MINIMAL, None).unwrap();
    assert_eq!(spec.deadline_ns, 250 * MS);
    assert_eq!(spec.horizon_ns, 60 * SECOND);
    assert_eq!(spec.band_mps, 2.0);
    assert_eq!(spec.script.hold_ns, 2 * SECOND);
}

#[test]
fn schema_errors_name_the_field() {
    let bad = MINIMAL.replace("\"cruise\"", "\"warp\"");
    let err = parse_scenario(&bad, None).unwrap_err();
    assert!(
        err.to_string().contains("driver.segments[0].accelerator"),
        "{err}"
    );

    let err = parse_scenario(
        &MINIMAL.replace("course_length_m = 100.0", "course_length_m = -1.0"),
        None,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        ScenarioError::Invalid {
            field: "course_length_m",
            ..
        }
    ));

    let err = parse_scenario(
        &format!("{MINIMAL}\n[[driver.segments]]\nat_ms = 0\n"),
        None,
    )
    .unwrap_err();
    assert!(
        matches!(err, ScenarioError::Segment { index: 1, .. }),
        "{err}"
    );
    assert!(err.to_string().contains("driver.segments[1]"));

    let err = parse_scenario(
        &MINIMAL.replace("scenario = \"stop-sign\"", "scenario = \"speed-change\""),
        None,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        ScenarioError::Invalid {
            field: "target_velocity_mps",
            ..
        }
    ));
}

#[test]
fn loads_from_disk_with_relative_template() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("t.prompt"),
        "[system]\nCoach.\n[user]\nv={velocity} s={displacement} {steer} {head}\n",
    )
    .unwrap();
    let path = dir.path().join("s.toml");
    fs::write(
        &path,
        format!("prompt_template = \"t.prompt\"\ndeadline_ms = 400\n{MINIMAL}"),
    )
    .unwrap();
    let spec = load_scenario(&path).unwrap();
    assert_eq!(spec.deadline_ns, 400 * MS);

    fs::write(
        dir.path().join("t.prompt"),
        "[system]\nCoach {speed}.\n[user]\n{velocity}\n",
    )
    .unwrap();
    assert!(matches!(
        load_scenario(&path),
        Err(ScenarioError::Template { .. })
    ));
    assert!(matches!(
        load_scenario(&dir.path().join("missing.toml")),
        Err(ScenarioError::Io { .. })
    ));
}
