//! Command implementations behind the `coachsim` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use coachsim_core::backends::{
    parse_inference_trace, serialize_inference_trace, AgentBackend, LatencyScript, LiveBackend,
    OracleBackend, ReplayBackend, ScriptedBackend,
};
use coachsim_core::coach::build_prompt;
use coachsim_core::config::BENCH_RUNS;
use coachsim_core::latency::run_latency_bench;
use coachsim_core::plant::CarState;
use coachsim_core::runtime::{first_divergence, serialize_trace, MS, SECOND};
use coachsim_core::scenarios::{resolve, Lane, Observation, ScenarioSpec};
use coachsim_core::sim::{run_scenario, RunOptions, RunReport};

pub const ENDPOINT_ENV: &str = "COACHSIM_ENDPOINT";

/// Where completions come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendSpec {
    /// Rule oracle; optional per-call latencies in ms, the last repeating.
    Oracle(Option<Vec<u64>>),
    Replay(PathBuf),
    /// Endpoint and model; either may come from flags instead.
    Live(Option<String>, Option<String>),
    /// Fixed `NONE|` reply with latencies in ms cycling.
    Scripted(Vec<u64>),
}

fn ms_list(s: &str) -> Result<Vec<u64>, String> {
    let list = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad latency `{x}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err("empty latency list".into());
    }
    Ok(list)
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("oracle", None) => Ok(BackendSpec::Oracle(None)),
            ("oracle", Some(a)) => Ok(BackendSpec::Oracle(Some(ms_list(a)?))),
            ("replay", Some(path)) if !path.is_empty() => Ok(BackendSpec::Replay(path.into())),
            ("replay", _) => Err("replay needs a trace file: replay:<file>".into()),
            ("live", None) => Ok(BackendSpec::Live(None, None)),
            ("live", Some(a)) => match a.rsplit_once(',') {
                Some((endpoint, model)) if !endpoint.is_empty() && !model.is_empty() => {
                    Ok(BackendSpec::Live(Some(endpoint.into()), Some(model.into())))
                }
                _ => Err("live backend takes live:<endpoint>,<model>".into()),
            },
            ("scripted", Some(a)) => Ok(BackendSpec::Scripted(ms_list(a)?)),
            _ => Err(format!(
                "unknown backend `{s}` (expected oracle, oracle:<ms,..>, replay:<file>, live:<endpoint>,<model> or scripted:<ms,..>)"
            )),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "coachsim",
    version,
    about = "Deterministic driving-coach simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one simulation and write its artifacts.
    Run(RunArgs),
    /// Run a simulation repeatedly and compare the traces byte for byte.
    Verify(VerifyArgs),
    /// Measure inference latency to choose a deadline.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Bundled scenario id (stop-sign, speed-change, lane-change) or a scenario file.
    #[arg(long, default_value = "stop-sign")]
    pub scenario: String,
    /// oracle | oracle:<ms,..> | replay:<file> | live:<endpoint>,<model> | scripted:<ms,..>
    #[arg(long, default_value = "oracle")]
    pub backend: BackendSpec,
    /// Endpoint for a bare `live` backend.
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
    /// Model for a bare `live` backend.
    #[arg(long)]
    pub model: Option<String>,
    /// Fail on any prompt digest mismatch during replay.
    #[arg(long)]
    pub strict_replay: bool,
    /// HTTP timeout for the live backend.
    #[arg(long, default_value_t = 30)]
    pub timeout_s: u64,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub deadline_ms: Option<u64>,
    #[arg(long)]
    pub horizon_s: Option<u64>,
    /// Write the inference trace of this run.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub deadline_ms: Option<u64>,
    #[arg(long)]
    pub horizon_s: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = BENCH_RUNS)]
    pub runs: usize,
}

fn ms_to_ns(ms: &[u64]) -> Vec<u64> {
    ms.iter().map(|m| m * MS).collect()
}

impl CommonArgs {
    pub fn scenario(&self) -> Result<ScenarioSpec> {
        resolve(&self.scenario).with_context(|| format!("loading scenario `{}`", self.scenario))
    }

    pub fn backend(&self) -> Result<Box<dyn AgentBackend>> {
        Ok(match &self.backend {
            BackendSpec::Oracle(None) => Box::new(OracleBackend::default()),
            BackendSpec::Oracle(Some(list)) => {
                Box::new(OracleBackend::new(LatencyScript::Sequence(ms_to_ns(list))))
            }
            BackendSpec::Scripted(list) => Box::new(ScriptedBackend::new("NONE|", ms_to_ns(list))),
            BackendSpec::Replay(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let records = parse_inference_trace(&text)?;
                Box::new(ReplayBackend::new(records, self.strict_replay))
            }
            BackendSpec::Live(endpoint, model) => {
                let endpoint = endpoint
                    .as_ref()
                    .or(self.endpoint.as_ref())
                    .context("live backend needs an endpoint (live:<endpoint>,<model>, --endpoint or COACHSIM_ENDPOINT)")?;
                let model = model
                    .as_ref()
                    .or(self.model.as_ref())
                    .context("live backend needs a model (live:<endpoint>,<model> or --model)")?;
                Box::new(LiveBackend::new(
                    endpoint,
                    model,
                    Duration::from_secs(self.timeout_s),
                )?)
            }
        })
    }
}

fn options(deadline_ms: Option<u64>, horizon_s: Option<u64>, record: bool) -> Result<RunOptions> {
    if deadline_ms == Some(0) {
        bail!("--deadline-ms must be positive");
    }
    if horizon_s == Some(0) {
        bail!("--horizon-s must be positive");
    }
    Ok(RunOptions {
        deadline_ns: deadline_ms.map(|m| m * MS),
        horizon_ns: horizon_s.map(|s| s * SECOND),
        record,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Returns the process exit status.
pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.common.scenario()?;
    let opts = options(args.deadline_ms, args.horizon_s, args.record.is_some())?;
    let report = run_scenario(&spec, args.common.backend()?, &opts)?;
    if let Some(path) = &args.trace_out {
        write_file(path, serialize_trace(&report.trace).as_bytes())?;
    }
    if let (Some(path), Some(records)) = (&args.record, &report.records) {
        write_file(path, serialize_inference_trace(records).as_bytes())?;
    }
    if let Some(path) = &args.csv_out {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    writeln!(out, "scenario: {} ({})", spec.name, spec.kind)?;
    write!(out, "{}", report.summary())?;
    Ok(fault_status(&report, out)?)
}

fn fault_status(report: &RunReport, out: &mut dyn Write) -> std::io::Result<i32> {
    match &report.fault {
        Some(f) => {
            writeln!(out, "fault: {f}")?;
            Ok(1)
        }
        None => Ok(0),
    }
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    if matches!(args.common.backend, BackendSpec::Live(..)) {
        bail!("verify refuses the live backend: its inputs differ between runs; record a trace and verify with replay:<file>");
    }
    if args.runs < 2 {
        bail!("--runs must be at least 2");
    }
    let spec = args.common.scenario()?;
    let opts = options(args.deadline_ms, args.horizon_s, false)?;
    let mut reference: Option<String> = None;
    for run in 0..args.runs {
        let report = run_scenario(&spec, args.common.backend()?, &opts)?;
        if fault_status(&report, out)? != 0 {
            writeln!(out, "FAIL: run {run} stopped on a hard fault")?;
            return Ok(1);
        }
        let bytes = serialize_trace(&report.trace);
        match &reference {
            None => reference = Some(bytes),
            Some(first) if *first == bytes => {}
            Some(first) => {
                let (line, l, r) = first_divergence(first, &bytes).expect("traces differ");
                writeln!(out, "FAIL: run {run} diverges from run 0 at line {line}")?;
                writeln!(out, "  run 0:   {}", l.unwrap_or("<end of trace>"))?;
                writeln!(out, "  run {run}: {}", r.unwrap_or("<end of trace>"))?;
                return Ok(1);
            }
        }
    }
    let lines = reference.as_deref().map_or(0, |r| r.lines().count());
    writeln!(
        out,
        "PASS: {} runs, {} identical trace lines each",
        args.runs, lines
    )?;
    Ok(0)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if args.runs == 0 {
        bail!("--runs must be positive");
    }
    let spec = args.common.scenario()?;
    let obs = Observation {
        state: CarState::at_rest_with(spec.v0),
        lane: Lane::Left,
        head_checked: false,
    };
    let prompt = build_prompt(&spec.template, &obs, &spec.envelope());
    let mut backend = args.common.backend()?;
    match run_latency_bench(backend.as_mut(), &prompt, args.runs) {
        Ok(report) => {
            writeln!(out, "{report}")?;
            Ok(0)
        }
        Err(e) => {
            writeln!(out, "error: {e}")?;
            Ok(1)
        }
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}
