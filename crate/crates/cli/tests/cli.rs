use std::fs;
use std::process::{Command, Output};
use std::time::Duration;

use coachsim_core::backends::{StubReply, StubServer};

fn coachsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coachsim"))
        .args(args)
        .env_remove("COACHSIM_ENDPOINT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.tsv");
    let csv = dir.path().join("run.csv");
    let rec = dir.path().join("inf.tsv");
    let o = coachsim(&[
        "run",
        "--scenario",
        "stop-sign",
        "--trace-out",
        trace.to_str().unwrap(),
        "--csv-out",
        csv.to_str().unwrap(),
        "--record",
        rec.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("stop-sign"));
    assert!(!fs::read_to_string(&trace).unwrap().is_empty());
    assert_eq!(
        fs::read_to_string(&csv).unwrap().lines().count(),
        30 * 10 + 2
    );

    let replay = format!("replay:{}", rec.display());
    let o = coachsim(&[
        "verify",
        "--scenario",
        "stop-sign",
        "--backend",
        &replay,
        "--strict-replay",
        "--runs",
        "3",
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("PASS: 3 runs"));
}

#[test]
fn verify_oracle_passes() {
    let o = coachsim(&["verify", "--scenario", "lane-change", "--runs", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS: 4 runs"));
}

#[test]
fn verify_refuses_live() {
    let o = coachsim(&["verify", "--backend", "live:http://127.0.0.1:9,m"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refuses the live backend"));
}

#[test]
fn truncated_replay_faults() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("inf.tsv");
    let o = coachsim(&["run", "--horizon-s", "5", "--record", rec.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&rec).unwrap();
    let short: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    fs::write(&rec, short).unwrap();
    let replay = format!("replay:{}", rec.display());
    let o = coachsim(&["run", "--horizon-s", "5", "--backend", &replay]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fault:"));
}

#[test]
fn bad_inputs_exit_2() {
    let o = coachsim(&["run", "--scenario", "nowhere.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
    let o = coachsim(&["run", "--backend", "live"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("endpoint"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "garbage\n").unwrap();
    let o = coachsim(&["run", "--backend", &format!("replay:{}", bad.display())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_and_fails_when_unreachable() {
    let o = coachsim(&["bench", "--backend", "scripted:10,30,20", "--runs", "9"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("samples: 9"), "{out}");
    assert!(out.contains("max_ms: 30.000"));

    let stub = StubServer::start(vec![StubReply::raw(500, "no", Duration::ZERO)]).unwrap();
    let backend = format!("live:{},m", stub.endpoint());
    let o = coachsim(&["bench", "--backend", &backend, "--runs", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("error:"));
}
