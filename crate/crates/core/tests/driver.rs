use coachsim_core::driver::{
    perceive_tick, receive_instruction, ActiveDirective, Directive, Driver, DriverScript, Segment,
};
use coachsim_core::plant::{Accelerator, Brake, DriverCommand};
use coachsim_core::runtime::{MS, SECOND};
use proptest::prelude::*;

fn beginner() -> DriverScript {
    let seg = |from_ns, accelerator, brake| Segment {
        from_ns,
        command: DriverCommand {
            accelerator,
            brake,
            ..Default::default()
        },
    };
    DriverScript::new(vec![
        seg(0, Accelerator::StrongAccel, Brake::None),
        seg(3 * SECOND, Accelerator::Cruise, Brake::None),
        seg(6 * SECOND, Accelerator::None, Brake::Gentle),
    ])
    .unwrap()
}

#[test]
fn instruction_keywords() {
    assert_eq!(
        receive_instruction("Apply gentle braking now."),
        Directive::BrakeNow
    );
    assert_eq!(
        receive_instruction("Check your right mirror before merging."),
        Directive::CheckRight
    );
    assert_eq!(receive_instruction(""), Directive::NoOp);
    assert_eq!(
        receive_instruction("Merge into the right lane."),
        Directive::SteerRight
    );
    assert_eq!(
        receive_instruction("Maintain your speed."),
        Directive::HoldSpeed
    );
    assert_eq!(receive_instruction("SLOW DOWN"), Directive::SlowDown);
}

#[test]
fn perceive_examples() {
    let script = beginner();
    assert_eq!(
        perceive_tick(0, &script, None).accelerator,
        Accelerator::StrongAccel
    );
    let brake = ActiveDirective {
        directive: Directive::BrakeNow,
        until_ns: 10 * SECOND,
    };
    assert_eq!(
        perceive_tick(100 * MS, &script, Some(&brake)).brake,
        Brake::Gentle
    );
    assert_eq!(
        perceive_tick(100 * SECOND, &script, None).brake,
        Brake::Gentle
    );
}

fn texts() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("Slow down.".to_owned()),
        Just("Speed up a little.".to_owned()),
        Just("Braking for you.".to_owned()),
        Just("Check your right mirror.".to_owned()),
        Just("Hold your speed.".to_owned()),
        "[a-z ]{0,20}",
    ]
}

proptest! {
    /// The command stream is a pure function of the script and the timed
    /// instruction sequence.
    #[test]
    fn command_stream_is_deterministic(instrs in prop::collection::vec((0u64..200, texts()), 0..30)) {
        let run = || {
            let mut d = Driver::new(beginner());
            let mut out = Vec::new();
            for tick in 0..200u64 {
                out.push(d.on_tick(tick * 100 * MS));
                for (_, text) in instrs.iter().filter(|(at, _)| *at == tick) {
                    d.on_instruction(text);
                }
            }
            out
        };
        prop_assert_eq!(run(), run());
    }

    /// A directive applies from the next tick for exactly the hold period.
    #[test]
    fn directive_hold(at in 0u64..100, hold_ticks in 1u64..40) {
        let mut script = DriverScript::constant(DriverCommand { accelerator: Accelerator::Cruise, ..Default::default() });
        script.hold_ns = hold_ticks * 100 * MS;
        let mut d = Driver::new(script);
        for tick in 0..200u64 {
            let cmd = d.on_tick(tick * 100 * MS);
            let active = tick > at && tick <= at + hold_ticks;
            prop_assert_eq!(cmd.brake == Brake::Gentle, active, "tick {}", tick);
            if tick == at {
                d.on_instruction("Slow down.");
            }
        }
    }
}
