//! The assembled coach-in-the-loop model.
//!
//! ```text
//!  Driver --cmd (500 ms)--> Car --state--> Environment --obs--> Inference
//!    ^                       ^                                    |  |
//!    |                       +------act (200 ms)------ Planner <--+--+
//!    +-------------------------instr------------------/   output, fallback
//! ```
//!
//! Driver and car share the perception period. The car publishes its state
//! before stepping, so the observation at tick `n` is `x_n`.

use std::fmt;

use crate::backends::{AgentBackend, BackendError, Completion, InferenceRecord};
use crate::coach::{
    build_prompt, parse_response, result_delay, CoachOutput, Planner, PromptTemplate,
};
use crate::config::{ACTUATION_DELAY_NS, DRIVER_DELAY_NS, PERCEPTION_PERIOD_NS};
use crate::driver::Driver;
use crate::plant::{plant_react, Actuation, CarState, DriverCommand};
use crate::runtime::{
    ConfigError, Payload, ReactorHandle, Runtime, RuntimeError, TopologyBuilder, TraceEvent,
    TraceKind, Trigger,
};
use crate::scenarios::{
    evaluate, Lane, LaneTracker, Observation, Outcome, SafetyEnvelope, Sample, ScenarioKind,
    ScenarioSpec,
};
use crate::text::escape;

/// Payload carried by every port and action of the model.
#[derive(Clone, Debug)]
pub enum Msg {
    Command(DriverCommand),
    State(CarState),
    Observation(Observation),
    Instruction(String),
    Actuation(Actuation),
    Output(CoachOutput),
    Fallback(&'static str),
    Result(Result<Completion, BackendError>),
}

impl Payload for Msg {
    fn kind(&self) -> &'static str {
        match self {
            Msg::Command(_) => "command",
            Msg::State(_) => "state",
            Msg::Observation(_) => "observation",
            Msg::Instruction(_) => "instruction",
            Msg::Actuation(_) => "actuation",
            Msg::Output(_) => "coach-output",
            Msg::Fallback(_) => "fallback",
            Msg::Result(_) => "inference-result",
        }
    }
}

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Msg::Command(c) => c.fmt(f),
            Msg::State(s) => s.fmt(f),
            Msg::Observation(o) => o.fmt(f),
            Msg::Instruction(text) => f.write_str(text),
            Msg::Actuation(Actuation::EmergencyBrake) => f.write_str("emergency-brake"),
            Msg::Output(out) => out.fmt(f),
            Msg::Fallback(reason) => f.write_str(reason),
            Msg::Result(Ok(c)) => write!(f, "latency_ns={} raw={}", c.latency_ns, escape(&c.raw)),
            Msg::Result(Err(e)) => write!(f, "error={e}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid topology: {0}")]
    Config(#[from] ConfigError),
}

struct CarReactor {
    state: CarState,
    command: DriverCommand,
    actuated_until_ns: Option<u64>,
    hold_ns: u64,
}

struct EnvReactor {
    tracker: LaneTracker,
    samples: Vec<Sample>,
}

struct InferenceReactor {
    template: PromptTemplate,
    envelope: SafetyEnvelope,
    backend: Box<dyn AgentBackend>,
    deadline_ns: u64,
    in_flight: bool,
    calls: u64,
    records: Option<Vec<InferenceRecord>>,
}

/// Options that override or extend a scenario.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub deadline_ns: Option<u64>,
    pub horizon_ns: Option<u64>,
    /// Capture an inference trace of every backend call.
    pub record: bool,
}

/// Everything one run produces.
#[derive(Debug)]
pub struct RunReport {
    pub trace: Vec<TraceEvent>,
    pub samples: Vec<Sample>,
    pub envelope: SafetyEnvelope,
    pub outcome: Outcome,
    pub inference_calls: u64,
    pub records: Option<Vec<InferenceRecord>>,
    /// Hard fault that stopped the run early, if any.
    pub fault: Option<RuntimeError>,
    pub horizon_ns: u64,
}

/// A built model ready to run.
pub struct Simulation {
    runtime: Runtime<Msg>,
    env: ReactorHandle<EnvReactor>,
    inference: ReactorHandle<InferenceReactor>,
    envelope: SafetyEnvelope,
    horizon_ns: u64,
}

impl Simulation {
    pub fn new(
        spec: &ScenarioSpec,
        backend: Box<dyn AgentBackend>,
        opts: &RunOptions,
    ) -> Result<Self, SimError> {
        let deadline_ns = opts.deadline_ns.unwrap_or(spec.deadline_ns);
        let horizon_ns = opts.horizon_ns.unwrap_or(spec.horizon_ns);
        let envelope = spec.envelope();
        let mut b = TopologyBuilder::<Msg>::new();

        let driver = b.add_reactor("driver", Driver::new(spec.script.clone()));
        let car = b.add_reactor(
            "car",
            CarReactor {
                state: CarState::at_rest_with(spec.v0),
                command: DriverCommand::default(),
                actuated_until_ns: None,
                hold_ns: spec.actuation_hold_ns,
            },
        );
        let env = b.add_reactor(
            "environment",
            EnvReactor {
                tracker: LaneTracker::new(Lane::Left),
                samples: Vec::new(),
            },
        );
        let inference = b.add_reactor(
            "inference",
            InferenceReactor {
                template: spec.template.clone(),
                envelope: envelope.clone(),
                backend,
                deadline_ns,
                in_flight: false,
                calls: 0,
                records: opts.record.then(Vec::new),
            },
        );
        let planner = b.add_reactor("planner", Planner::default());

        let d_instr = b.add_port(driver.id(), "instr", "instruction");
        let d_cmd = b.add_port(driver.id(), "cmd", "command");
        let d_tick = b.add_timer(driver.id(), "perceive", 0, PERCEPTION_PERIOD_NS)?;
        let c_cmd = b.add_port(car.id(), "cmd", "command");
        let c_act = b.add_port(car.id(), "act", "actuation");
        let c_state = b.add_port(car.id(), "state", "state");
        let c_tick = b.add_timer(car.id(), "step", 0, PERCEPTION_PERIOD_NS)?;
        let e_state = b.add_port(env.id(), "state", "state");
        let e_obs = b.add_port(env.id(), "obs", "observation");
        let i_obs = b.add_port(inference.id(), "obs", "observation");
        let i_output = b.add_port(inference.id(), "output", "coach-output");
        let i_fallback = b.add_port(inference.id(), "fallback", "fallback");
        let i_result = b.add_action(inference.id(), "result", "inference-result");
        let p_output = b.add_port(planner.id(), "output", "coach-output");
        let p_fallback = b.add_port(planner.id(), "fallback", "fallback");
        let p_act = b.add_port(planner.id(), "act", "actuation");
        let p_instr = b.add_port(planner.id(), "instr", "instruction");

        b.connect(d_cmd, c_cmd, DRIVER_DELAY_NS)?;
        b.connect(c_state, e_state, 0)?;
        b.connect(e_obs, i_obs, 0)?;
        b.connect(i_output, p_output, 0)?;
        b.connect(i_fallback, p_fallback, 0)?;
        b.connect(p_act, c_act, ACTUATION_DELAY_NS)?;
        b.connect(p_instr, d_instr, 0)?;

        b.add_reaction(
            driver,
            "on_instr",
            &[d_instr.into()],
            &[],
            move |d: &mut Driver, ctx| {
                if let Some(Msg::Instruction(text)) = ctx.get(d_instr) {
                    let text = text.clone();
                    d.on_instruction(&text);
                }
            },
        );
        b.add_reaction(
            driver,
            "on_perceive",
            &[d_tick.into()],
            &[d_cmd],
            move |d: &mut Driver, ctx| {
                let cmd = d.on_tick(ctx.time_ns());
                ctx.set(d_cmd, Msg::Command(cmd));
            },
        );

        b.add_reaction(
            car,
            "on_cmd",
            &[c_cmd.into()],
            &[],
            move |c: &mut CarReactor, ctx| {
                if let Some(Msg::Command(cmd)) = ctx.get(c_cmd) {
                    c.command = *cmd;
                }
            },
        );
        b.add_reaction(
            car,
            "on_act",
            &[c_act.into()],
            &[],
            move |c: &mut CarReactor, ctx| {
                if let Some(Msg::Actuation(act)) = ctx.get(c_act).cloned() {
                    c.actuated_until_ns = Some(ctx.time_ns() + c.hold_ns);
                    ctx.trace(TraceKind::Actuation, Msg::Actuation(act));
                }
            },
        );
        b.add_reaction(
            car,
            "on_step",
            &[c_tick.into()],
            &[c_state],
            move |c: &mut CarReactor, ctx| {
                ctx.set(c_state, Msg::State(c.state));
                let t = ctx.time_ns();
                let act = c
                    .actuated_until_ns
                    .is_some_and(|until| t < until)
                    .then_some(Actuation::EmergencyBrake);
                c.state = plant_react(&c.command, act, &c.state, PERCEPTION_PERIOD_NS);
            },
        );

        b.add_reaction(
            env,
            "on_state",
            &[e_state.into()],
            &[e_obs],
            move |e: &mut EnvReactor, ctx| {
                let Some(Msg::State(state)) = ctx.get(e_state).cloned() else {
                    return;
                };
                let t = ctx.time_ns();
                let (lane, head_checked) = e.tracker.observe(t, &state);
                e.samples.push(Sample {
                    time_ns: t,
                    state,
                    lane,
                });
                ctx.set(
                    e_obs,
                    Msg::Observation(Observation {
                        state,
                        lane,
                        head_checked,
                    }),
                );
            },
        );

        // Declared before `infer` so a result frees the slot for a trigger
        // at the same logical time.
        let complete = b.add_reaction(
            inference,
            "complete",
            &[i_result.into()],
            &[i_output, i_fallback],
            move |inf: &mut InferenceReactor, ctx| {
                let Some(Msg::Result(result)) = ctx.action(i_result).cloned() else {
                    return;
                };
                inf.in_flight = false;
                match result {
                    Err(e) => {
                        ctx.trace(TraceKind::BackendError, &e);
                        ctx.check_deadline(u64::MAX);
                    }
                    Ok(c) => {
                        if let Some(w) = &c.warning {
                            ctx.trace(TraceKind::ReplayWarning, w);
                        }
                        if ctx.check_deadline(c.latency_ns).is_violated() {
                            return;
                        }
                        match parse_response(&c.raw) {
                            Ok(out) => ctx.set(i_output, Msg::Output(out)),
                            Err(e) => {
                                ctx.trace(
                                    TraceKind::ParseError,
                                    format!("{e}: {}", escape(&c.raw)),
                                );
                                ctx.set(i_fallback, Msg::Fallback("parse-error"));
                            }
                        }
                    }
                }
            },
        );
        b.set_deadline(complete, deadline_ns);
        b.set_deadline_handler(complete, move |_: &mut InferenceReactor, ctx| {
            ctx.set(i_fallback, Msg::Fallback("deadline-miss"));
        });
        b.add_reaction(
            inference,
            "infer",
            &[i_obs.into()],
            &[],
            move |inf: &mut InferenceReactor, ctx| {
                let Some(Msg::Observation(obs)) = ctx.get(i_obs).cloned() else {
                    return;
                };
                if inf.in_flight {
                    ctx.trace(TraceKind::InferenceSkipped, "previous inference in flight");
                    return;
                }
                let prompt = build_prompt(&inf.template, &obs, &inf.envelope);
                let result = inf.backend.complete(&prompt);
                if let Some(records) = inf.records.as_mut() {
                    records.extend(InferenceRecord::capture(inf.calls, &prompt, &result));
                }
                inf.calls += 1;
                if let Err(e) = &result {
                    if e.is_fatal() {
                        ctx.fault(e.to_string());
                        return;
                    }
                }
                let latency = result.as_ref().ok().map(|c| c.latency_ns);
                inf.in_flight = true;
                ctx.schedule(
                    i_result,
                    result_delay(latency, inf.deadline_ns),
                    Msg::Result(result),
                );
            },
        );

        b.add_reaction(
            planner,
            "on_fallback",
            &[p_fallback.into()],
            &[p_act],
            move |_: &mut Planner, ctx| {
                if let Some(Msg::Fallback(reason)) = ctx.get(p_fallback).cloned() {
                    ctx.trace(TraceKind::Fallback, reason);
                    ctx.set(p_act, Msg::Actuation(Actuation::EmergencyBrake));
                }
            },
        );
        b.add_reaction(
            planner,
            "on_output",
            &[Trigger::from(p_output)],
            &[p_act, p_instr],
            move |p: &mut Planner, ctx| {
                let Some(Msg::Output(out)) = ctx.get(p_output).cloned() else {
                    return;
                };
                let step = p.step(&out, ctx.time_ns());
                if let Some((from, to)) = step.transition {
                    ctx.trace(TraceKind::ModeTransition, format!("{from}->{to}"));
                }
                if step.actuate {
                    ctx.set(p_act, Msg::Actuation(Actuation::EmergencyBrake));
                }
                if let Some(text) = step.emitted {
                    ctx.trace(TraceKind::Instruction, &text);
                    ctx.set(p_instr, Msg::Instruction(text));
                }
                if let Some(text) = step.suppressed {
                    ctx.trace(TraceKind::Suppressed, text);
                }
            },
        );

        Ok(Self {
            runtime: b.finalize()?,
            env,
            inference,
            envelope,
            horizon_ns,
        })
    }

    pub fn runtime(&self) -> &Runtime<Msg> {
        &self.runtime
    }

    /// Runs to the horizon. A hard fault ends the run early and is reported
    /// alongside the partial trace.
    pub fn run(mut self) -> RunReport {
        let fault = self.runtime.run_until(self.horizon_ns).err();
        let trace = self.runtime.take_trace();
        let samples = std::mem::take(&mut self.runtime.state_mut(self.env).samples);
        let inf = self.runtime.state_mut(self.inference);
        let (inference_calls, records) = (inf.calls, inf.records.take());
        let outcome = evaluate(&self.envelope, &samples);
        RunReport {
            trace,
            samples,
            envelope: self.envelope,
            outcome,
            inference_calls,
            records,
            fault,
            horizon_ns: self.horizon_ns,
        }
    }
}

/// Builds and runs one scenario.
pub fn run_scenario(
    spec: &ScenarioSpec,
    backend: Box<dyn AgentBackend>,
    opts: &RunOptions,
) -> Result<RunReport, SimError> {
    Ok(Simulation::new(spec, backend, opts)?.run())
}

/// Categorical marker for one CSV row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Marker {
    None,
    Suppressed,
    Instruction,
    Actuation,
    Fallback,
    DeadlineMiss,
}

impl Marker {
    pub fn as_str(self) -> &'static str {
        match self {
            Marker::None => "none",
            Marker::Suppressed => "suppressed",
            Marker::Instruction => "instruction",
            Marker::Actuation => "actuation",
            Marker::Fallback => "fallback",
            Marker::DeadlineMiss => "deadline_miss",
        }
    }

    fn of(kind: TraceKind) -> Option<Self> {
        match kind {
            TraceKind::Suppressed => Some(Marker::Suppressed),
            TraceKind::Instruction => Some(Marker::Instruction),
            TraceKind::Actuation => Some(Marker::Actuation),
            TraceKind::Fallback => Some(Marker::Fallback),
            TraceKind::DeadlineMiss => Some(Marker::DeadlineMiss),
            _ => None,
        }
    }
}

impl RunReport {
    /// Marker per sample: the most severe event between this tick and the
    /// next.
    pub fn markers(&self) -> Vec<Marker> {
        let mut out = vec![Marker::None; self.samples.len()];
        for ev in &self.trace {
            let Some(m) = Marker::of(ev.kind) else {
                continue;
            };
            let row = self
                .samples
                .partition_point(|s| s.time_ns <= ev.tag.time_ns);
            if let Some(slot) = row.checked_sub(1).and_then(|r| out.get_mut(r)) {
                *slot = (*slot).max(m);
            }
        }
        out
    }

    /// Plot-ready rows, one per perception tick.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "time_s",
            "displacement_m",
            "velocity_mps",
            "lower_bound",
            "upper_bound",
            "event_marker",
        ])?;
        for (s, m) in self.samples.iter().zip(self.markers()) {
            let disp = s.state.displacement.meters();
            let (lo, hi) = self.envelope.bounds(disp);
            out.write_record([
                format!("{:.1}", s.time_ns as f64 / 1e9),
                s.state.displacement.to_string(),
                s.state.velocity.to_string(),
                format!("{lo:.6}"),
                format!("{hi:.6}"),
                m.as_str().to_owned(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Human-readable success summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.outcome.checks {
            s += &format!(
                "{}: {} ({})\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            );
        }
        let count = |k: TraceKind| self.trace.iter().filter(|e| e.kind == k).count();
        s += &format!(
            "inferences: {}, instructions: {}, suppressed: {}, deadline misses: {}, fallbacks: {}, actuations: {}\n",
            self.inference_calls,
            count(TraceKind::Instruction),
            count(TraceKind::Suppressed),
            count(TraceKind::DeadlineMiss),
            count(TraceKind::Fallback),
            count(TraceKind::Actuation),
        );
        s
    }

    pub fn kind(&self) -> ScenarioKind {
        self.envelope.kind
    }
}
