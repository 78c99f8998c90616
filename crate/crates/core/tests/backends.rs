use std::time::Duration;

use coachsim_core::backends::{
    parse_inference_trace, prompt_digest, serialize_inference_trace, AgentBackend, BackendError,
    InferenceRecord, LiveBackend, OracleBackend, ReplayBackend, StubReply, StubServer,
};
use coachsim_core::coach::{build_prompt, PromptDoc};
use coachsim_core::plant::CarState;
use coachsim_core::scenarios::{builtin, Lane, Observation};
use coachsim_core::units::{Displacement, Velocity};
use proptest::prelude::*;
use serde_json::Value;

fn prompt_at(v: f64, s: f64) -> PromptDoc {
    let spec = builtin("stop-sign").unwrap();
    let obs = Observation {
        state: CarState {
            velocity: Velocity::from_mps(v),
            displacement: Displacement::from_meters(s),
            ..Default::default()
        },
        lane: Lane::Left,
        head_checked: false,
    };
    build_prompt(&spec.template, &obs, &spec.envelope())
}

proptest! {
    #[test]
    fn oracle_is_pure(v in 0.0f64..30.0, s in 0.0f64..120.0) {
        let p = prompt_at(v, s);
        let a = OracleBackend::default().complete(&p).unwrap();
        let b = OracleBackend::default().complete(&p).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn oracle_example_deviation() {
    let c = OracleBackend::default()
        .complete(&prompt_at(10.0, 50.0))
        .unwrap();
    assert!(c.raw.starts_with("WARNING|"), "{}", c.raw);
    let c = OracleBackend::default()
        .complete(&prompt_at(5.0, 75.0))
        .unwrap();
    assert_eq!(c.raw, "NONE|");
}

fn records(prompts: &[PromptDoc]) -> Vec<InferenceRecord> {
    prompts
        .iter()
        .enumerate()
        .map(|(i, p)| InferenceRecord {
            index: i as u64,
            prompt_digest: prompt_digest(p),
            latency_ns: 10 * (i as u64 + 1),
            response: Ok(format!("NONE|{i}")),
        })
        .collect()
}

#[test]
fn replay_in_order_then_exhausted() {
    let prompts: Vec<PromptDoc> = (0..3).map(|i| prompt_at(10.0, i as f64)).collect();
    let mut r = ReplayBackend::new(records(&prompts), true);
    for (i, p) in prompts.iter().enumerate() {
        let c = r.complete(p).unwrap();
        assert_eq!(
            (c.raw, c.latency_ns),
            (format!("NONE|{i}"), 10 * (i as u64 + 1))
        );
    }
    assert_eq!(r.consumed(), 3);
    assert_eq!(
        r.complete(&prompts[0]),
        Err(BackendError::Exhausted { index: 3 })
    );
    assert!(BackendError::Exhausted { index: 3 }.is_fatal());
}

#[test]
fn replay_digest_mismatch() {
    let prompts = [prompt_at(10.0, 0.0)];
    let mutated = prompt_at(10.0, 1.0);
    let mut strict = ReplayBackend::new(records(&prompts), true);
    assert!(matches!(
        strict.complete(&mutated),
        Err(BackendError::DigestMismatch { index: 0, .. })
    ));
    let mut lenient = ReplayBackend::new(records(&prompts), false);
    let c = lenient.complete(&mutated).unwrap();
    assert!(c.warning.unwrap().contains("digest mismatch"));
}

#[test]
fn replayed_error_keeps_its_message() {
    let p = prompt_at(10.0, 0.0);
    let original = BackendError::Transport("connection refused".into());
    let rec = InferenceRecord::capture(0, &p, &Err(original.clone())).unwrap();
    let text = serialize_inference_trace(&[rec]);
    let mut r = ReplayBackend::new(parse_inference_trace(&text).unwrap(), true);
    assert_eq!(
        r.complete(&p).unwrap_err().to_string(),
        original.to_string()
    );
}

#[test]
fn live_against_stub() {
    let stub = StubServer::start(vec![StubReply::content(
        "WARNING|Slow down.",
        Duration::from_millis(15),
    )])
    .unwrap();
    let mut live = LiveBackend::new(&stub.endpoint(), "llama3:8b", Duration::from_secs(5)).unwrap();
    let p = prompt_at(10.0, 50.0);
    let c = live.complete(&p).unwrap();
    assert_eq!(c.raw, "WARNING|Slow down.");
    assert!(c.latency_ns >= 15_000_000);

    let body: Value = serde_json::from_str(&stub.requests()[0]).unwrap();
    assert_eq!(body["model"], "llama3:8b");
    assert_eq!(body["stream"], false);
    assert_eq!(body["options"]["num_predict"], 30);
    assert_eq!(body["options"]["temperature"], 0.0);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][0]["content"], p.system_text.as_str());
    assert_eq!(body["messages"][1]["role"], "user");
    assert_eq!(body["messages"][1]["content"], p.user_text.as_str());
}

#[test]
fn live_errors() {
    let stub = StubServer::start(vec![
        StubReply::raw(500, "{\"error\":\"boom\"}", Duration::ZERO),
        StubReply::raw(200, "{\"message\":{}}", Duration::ZERO),
        StubReply::raw(200, "not json", Duration::ZERO),
    ])
    .unwrap();
    let mut live = LiveBackend::new(&stub.endpoint(), "m", Duration::from_secs(5)).unwrap();
    let p = prompt_at(10.0, 0.0);
    assert!(matches!(live.complete(&p), Err(BackendError::Transport(_))));
    assert!(matches!(live.complete(&p), Err(BackendError::Malformed(_))));
    assert!(matches!(live.complete(&p), Err(BackendError::Malformed(_))));

    let addr = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let mut down =
        LiveBackend::new(&format!("http://{addr}"), "m", Duration::from_secs(2)).unwrap();
    let err = down.complete(&p).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)) && !err.is_fatal());
}
