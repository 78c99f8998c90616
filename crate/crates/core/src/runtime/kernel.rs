use std::any::Any;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::marker::PhantomData;

use super::trace::{TraceEvent, TraceKind};
use super::Tag;

/// Values carried on ports and actions.
///
/// `Display` must be canonical: it is what ends up in the trace file.
pub trait Payload: Clone + fmt::Display + 'static {
    /// Type label; connected ports must agree on it.
    fn kind(&self) -> &'static str;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReactorId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimerId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReactionId(usize);

/// Anything an event can be addressed to and a reaction can be triggered by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trigger {
    Port(PortId),
    Timer(TimerId),
    Action(ActionId),
}

impl From<PortId> for Trigger {
    fn from(p: PortId) -> Self {
        Trigger::Port(p)
    }
}

impl From<TimerId> for Trigger {
    fn from(t: TimerId) -> Self {
        Trigger::Timer(t)
    }
}

impl From<ActionId> for Trigger {
    fn from(a: ActionId) -> Self {
        Trigger::Action(a)
    }
}

#[derive(Clone, Debug)]
pub struct Event<V> {
    pub tag: Tag,
    pub target: Trigger,
    /// `None` for timer events.
    pub payload: Option<V>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeadlineStatus {
    Met,
    Violated,
}

impl DeadlineStatus {
    pub fn is_violated(self) -> bool {
        self == DeadlineStatus::Violated
    }
}

/// Strict comparison: an elapsed time equal to the deadline meets it.
pub fn check_deadline(elapsed_ns: u64, deadline_ns: u64) -> DeadlineStatus {
    if elapsed_ns > deadline_ns {
        DeadlineStatus::Violated
    } else {
        DeadlineStatus::Met
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("port `{port}` already has a writer")]
    DuplicateWriter { port: String },
    #[error("cannot connect `{src}` ({src_kind}) to `{dst}` ({dst_kind})")]
    TypeMismatch {
        src: String,
        src_kind: &'static str,
        dst: String,
        dst_kind: &'static str,
    },
    #[error("timer `{timer}` must have a positive period")]
    ZeroPeriod { timer: String },
    #[error("reaction `{reaction}` has a deadline but no deadline handler")]
    MissingDeadlineHandler { reaction: String },
    #[error("reaction `{reaction}` has a deadline handler but no deadline")]
    HandlerWithoutDeadline { reaction: String },
    #[error("zero-delay cycle through reactions {reactions:?}")]
    ZeroDelayCycle { reactions: Vec<String> },
}

/// Hard faults. A fault aborts the run; the trace up to the fault remains
/// available through [`Runtime::trace`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("cannot schedule at {requested}: current tag is {current}")]
    PastTag { requested: Tag, current: Tag },
    #[error("`{target}` written twice at {tag}")]
    DuplicateWrite { target: String, tag: Tag },
    #[error("reaction `{reaction}` wrote undeclared effect `{port}`")]
    UndeclaredEffect { reaction: String, port: String },
    #[error("`{target}` expects {expected} payloads, got {actual}")]
    PayloadKind {
        target: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("fault in `{source_name}` at {tag}: {reason}")]
    Fault {
        tag: Tag,
        source_name: String,
        reason: String,
    },
}

type Body<V> = Box<dyn FnMut(&mut dyn Any, &mut Ctx<'_, V>)>;

/// Typed handle to a reactor's state.
pub struct ReactorHandle<S> {
    id: ReactorId,
    _state: PhantomData<fn() -> S>,
}

impl<S> ReactorHandle<S> {
    pub fn id(&self) -> ReactorId {
        self.id
    }
}

impl<S> Clone for ReactorHandle<S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for ReactorHandle<S> {}

pub struct ReactionHandle<S> {
    id: ReactionId,
    _state: PhantomData<fn() -> S>,
}

impl<S> ReactionHandle<S> {
    pub fn id(&self) -> ReactionId {
        self.id
    }
}

impl<S> Clone for ReactionHandle<S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for ReactionHandle<S> {}

struct PortDecl {
    qualified: String,
    kind: &'static str,
}

struct TimerDecl {
    qualified: String,
    offset_ns: u64,
    period_ns: u64,
}

struct ActionDecl {
    qualified: String,
    kind: &'static str,
}

struct ReactionMeta {
    qualified: String,
    owner: ReactorId,
    triggers: Vec<Trigger>,
    effects: Vec<PortId>,
    deadline_ns: Option<u64>,
}

struct ReactionSlot<V: Payload> {
    body: Body<V>,
    handler: Option<Body<V>>,
}

/// Programmatic topology construction. Nothing runs until [`finalize`].
///
/// [`finalize`]: TopologyBuilder::finalize
pub struct TopologyBuilder<V: Payload> {
    reactor_names: Vec<String>,
    states: Vec<Box<dyn Any>>,
    ports: Vec<PortDecl>,
    timers: Vec<TimerDecl>,
    actions: Vec<ActionDecl>,
    connections: Vec<(PortId, PortId, u64)>,
    metas: Vec<ReactionMeta>,
    slots: Vec<ReactionSlot<V>>,
}

impl<V: Payload> Default for TopologyBuilder<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Payload> TopologyBuilder<V> {
    pub fn new() -> Self {
        Self {
            reactor_names: Vec::new(),
            states: Vec::new(),
            ports: Vec::new(),
            timers: Vec::new(),
            actions: Vec::new(),
            connections: Vec::new(),
            metas: Vec::new(),
            slots: Vec::new(),
        }
    }

    pub fn add_reactor<S: 'static>(&mut self, name: &str, state: S) -> ReactorHandle<S> {
        self.reactor_names.push(name.to_owned());
        self.states.push(Box::new(state));
        ReactorHandle {
            id: ReactorId(self.states.len() - 1),
            _state: PhantomData,
        }
    }

    pub fn add_port(&mut self, owner: ReactorId, name: &str, kind: &'static str) -> PortId {
        self.ports.push(PortDecl {
            qualified: format!("{}.{}", self.reactor_names[owner.0], name),
            kind,
        });
        PortId(self.ports.len() - 1)
    }

    pub fn add_action(&mut self, owner: ReactorId, name: &str, kind: &'static str) -> ActionId {
        self.actions.push(ActionDecl {
            qualified: format!("{}.{}", self.reactor_names[owner.0], name),
            kind,
        });
        ActionId(self.actions.len() - 1)
    }

    /// Timer firing at `offset_ns + k * period_ns`, microstep 0, for k = 0, 1, ...
    pub fn add_timer(
        &mut self,
        owner: ReactorId,
        name: &str,
        offset_ns: u64,
        period_ns: u64,
    ) -> Result<TimerId, ConfigError> {
        let qualified = format!("{}.{}", self.reactor_names[owner.0], name);
        if period_ns == 0 {
            return Err(ConfigError::ZeroPeriod { timer: qualified });
        }
        self.timers.push(TimerDecl {
            qualified,
            offset_ns,
            period_ns,
        });
        Ok(TimerId(self.timers.len() - 1))
    }

    /// A write to `src` at `(t, m)` arrives at `dst` at `(t + delay_ns, 0)`,
    /// or at `(t, m + 1)` when `delay_ns` is zero.
    pub fn connect(&mut self, src: PortId, dst: PortId, delay_ns: u64) -> Result<(), ConfigError> {
        let (s, d) = (&self.ports[src.0], &self.ports[dst.0]);
        if s.kind != d.kind {
            return Err(ConfigError::TypeMismatch {
                src: s.qualified.clone(),
                src_kind: s.kind,
                dst: d.qualified.clone(),
                dst_kind: d.kind,
            });
        }
        if self.connections.iter().any(|&(_, other, _)| other == dst) {
            return Err(ConfigError::DuplicateWriter {
                port: d.qualified.clone(),
            });
        }
        self.connections.push((src, dst, delay_ns));
        Ok(())
    }

    /// Reactions of one reactor run in declaration order when triggered at
    /// the same tag.
    pub fn add_reaction<S: 'static>(
        &mut self,
        reactor: ReactorHandle<S>,
        name: &str,
        triggers: &[Trigger],
        effects: &[PortId],
        mut body: impl FnMut(&mut S, &mut Ctx<'_, V>) + 'static,
    ) -> ReactionHandle<S> {
        self.metas.push(ReactionMeta {
            qualified: format!("{}.{}", self.reactor_names[reactor.id.0], name),
            owner: reactor.id,
            triggers: triggers.to_vec(),
            effects: effects.to_vec(),
            deadline_ns: None,
        });
        self.slots.push(ReactionSlot {
            body: Box::new(move |state, ctx| body(downcast::<S>(state), ctx)),
            handler: None,
        });
        ReactionHandle {
            id: ReactionId(self.metas.len() - 1),
            _state: PhantomData,
        }
    }

    pub fn set_deadline<S>(&mut self, reaction: ReactionHandle<S>, deadline_ns: u64) {
        self.metas[reaction.id.0].deadline_ns = Some(deadline_ns);
    }

    /// Handler run after the body when [`Ctx::check_deadline`] reported a
    /// violation.
    pub fn set_deadline_handler<S: 'static>(
        &mut self,
        reaction: ReactionHandle<S>,
        mut handler: impl FnMut(&mut S, &mut Ctx<'_, V>) + 'static,
    ) {
        self.slots[reaction.id.0].handler = Some(Box::new(move |state, ctx| {
            handler(downcast::<S>(state), ctx)
        }));
    }

    pub fn finalize(self) -> Result<Runtime<V>, ConfigError> {
        for (meta, slot) in self.metas.iter().zip(&self.slots) {
            match (meta.deadline_ns.is_some(), slot.handler.is_some()) {
                (true, false) => {
                    return Err(ConfigError::MissingDeadlineHandler {
                        reaction: meta.qualified.clone(),
                    })
                }
                (false, true) => {
                    return Err(ConfigError::HandlerWithoutDeadline {
                        reaction: meta.qualified.clone(),
                    })
                }
                _ => {}
            }
        }

        let order = self.topological_order()?;
        let mut position = vec![0; order.len()];
        for (pos, &r) in order.iter().enumerate() {
            position[r] = pos;
        }

        let mut by_trigger: BTreeMap<Trigger, Vec<usize>> = BTreeMap::new();
        for (r, meta) in self.metas.iter().enumerate() {
            for &t in &meta.triggers {
                by_trigger.entry(t).or_default().push(r);
            }
        }

        let mut fanout = vec![Vec::new(); self.ports.len()];
        for &(src, dst, delay) in &self.connections {
            fanout[src.0].push((dst, delay));
        }

        let mut core = Core {
            ports: self.ports,
            timers: self.timers,
            actions: self.actions,
            fanout,
            reactor_names: self.reactor_names,
            metas: self.metas,
            tag: Tag::ZERO,
            port_values: Vec::new(),
            action_values: Vec::new(),
            timer_present: Vec::new(),
            written: Vec::new(),
            queue: BTreeMap::new(),
            trace: Vec::new(),
            fault: None,
            deadline_violated: false,
        };
        core.port_values = vec![None; core.ports.len()];
        core.written = vec![false; core.ports.len()];
        core.action_values = vec![None; core.actions.len()];
        core.timer_present = vec![false; core.timers.len()];
        for i in 0..core.timers.len() {
            let first = Tag::at(core.timers[i].offset_ns);
            core.queue
                .entry(first)
                .or_default()
                .push((Trigger::Timer(TimerId(i)), None));
        }

        Ok(Runtime {
            core,
            states: self.states,
            slots: self.slots,
            order,
            position,
            by_trigger,
            current: None,
        })
    }

    /// Kahn's algorithm over zero-delay dependencies, lowest declaration
    /// index first among ready reactions.
    fn topological_order(&self) -> Result<Vec<usize>, ConfigError> {
        let n = self.metas.len();
        let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];

        let mut last_of_reactor: Vec<Option<usize>> = vec![None; self.states.len()];
        for (r, meta) in self.metas.iter().enumerate() {
            if let Some(prev) = last_of_reactor[meta.owner.0] {
                edges[prev].insert(r);
            }
            last_of_reactor[meta.owner.0] = Some(r);
        }

        for (r, meta) in self.metas.iter().enumerate() {
            for &effect in &meta.effects {
                for &(src, dst, delay) in &self.connections {
                    if src != effect || delay != 0 {
                        continue;
                    }
                    for (r2, other) in self.metas.iter().enumerate() {
                        if other.triggers.contains(&Trigger::Port(dst)) {
                            edges[r].insert(r2);
                        }
                    }
                }
            }
        }

        let mut indegree = vec![0usize; n];
        for targets in &edges {
            for &t in targets {
                indegree[t] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&r| indegree[r] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(r)) = ready.pop() {
            order.push(r);
            for &t in &edges[r] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.push(Reverse(t));
                }
            }
        }
        if order.len() != n {
            let reactions = (0..n)
                .filter(|&r| indegree[r] > 0)
                .map(|r| self.metas[r].qualified.clone())
                .collect();
            return Err(ConfigError::ZeroDelayCycle { reactions });
        }
        Ok(order)
    }
}

fn downcast<S: 'static>(state: &mut dyn Any) -> &mut S {
    state
        .downcast_mut::<S>()
        .expect("reactor state type is fixed by its handle")
}

struct Core<V> {
    ports: Vec<PortDecl>,
    timers: Vec<TimerDecl>,
    actions: Vec<ActionDecl>,
    fanout: Vec<Vec<(PortId, u64)>>,
    reactor_names: Vec<String>,
    metas: Vec<ReactionMeta>,

    tag: Tag,
    port_values: Vec<Option<V>>,
    action_values: Vec<Option<V>>,
    timer_present: Vec<bool>,
    written: Vec<bool>,
    queue: BTreeMap<Tag, Vec<(Trigger, Option<V>)>>,
    trace: Vec<TraceEvent>,
    fault: Option<RuntimeError>,
    deadline_violated: bool,
}

impl<V: Payload> Core<V> {
    fn target_name(&self, target: Trigger) -> &str {
        match target {
            Trigger::Port(p) => &self.ports[p.0].qualified,
            Trigger::Timer(t) => &self.timers[t.0].qualified,
            Trigger::Action(a) => &self.actions[a.0].qualified,
        }
    }

    fn enqueue(
        &mut self,
        tag: Tag,
        target: Trigger,
        payload: Option<V>,
    ) -> Result<(), RuntimeError> {
        let expected = match target {
            Trigger::Port(p) => Some(self.ports[p.0].kind),
            Trigger::Action(a) => Some(self.actions[a.0].kind),
            Trigger::Timer(_) => None,
        };
        if let (Some(expected), Some(value)) = (expected, payload.as_ref()) {
            if value.kind() != expected {
                return Err(RuntimeError::PayloadKind {
                    target: self.target_name(target).to_owned(),
                    expected,
                    actual: value.kind(),
                });
            }
        }
        let slot = self.queue.entry(tag).or_default();
        if slot.iter().any(|(t, _)| *t == target) {
            return Err(RuntimeError::DuplicateWrite {
                target: self.target_name(target).to_owned(),
                tag,
            });
        }
        slot.push((target, payload));
        Ok(())
    }

    fn record(&mut self, source: String, kind: TraceKind, payload: String) {
        self.trace.push(TraceEvent {
            tag: self.tag,
            source,
            kind,
            payload,
        });
    }

    fn clear_presence(&mut self) {
        self.port_values.iter_mut().for_each(|v| *v = None);
        self.action_values.iter_mut().for_each(|v| *v = None);
        self.timer_present.iter_mut().for_each(|v| *v = false);
        self.written.iter_mut().for_each(|v| *v = false);
    }
}

/// The view a reaction body gets of the running system.
pub struct Ctx<'a, V: Payload> {
    core: &'a mut Core<V>,
    reaction: usize,
}

impl<V: Payload> Ctx<'_, V> {
    pub fn tag(&self) -> Tag {
        self.core.tag
    }

    pub fn time_ns(&self) -> u64 {
        self.core.tag.time_ns
    }

    pub fn reactor_name(&self) -> &str {
        &self.core.reactor_names[self.core.metas[self.reaction].owner.0]
    }

    /// Value on an input port at the current tag.
    pub fn get(&self, port: PortId) -> Option<&V> {
        self.core.port_values[port.0].as_ref()
    }

    pub fn action(&self, action: ActionId) -> Option<&V> {
        self.core.action_values[action.0].as_ref()
    }

    pub fn is_present(&self, trigger: Trigger) -> bool {
        match trigger {
            Trigger::Port(p) => self.core.port_values[p.0].is_some(),
            Trigger::Timer(t) => self.core.timer_present[t.0],
            Trigger::Action(a) => self.core.action_values[a.0].is_some(),
        }
    }

    /// Writes `value` to an output port and forwards it along every
    /// connection from that port.
    pub fn set(&mut self, port: PortId, value: V) {
        let meta = &self.core.metas[self.reaction];
        if !meta.effects.contains(&port) {
            let err = RuntimeError::UndeclaredEffect {
                reaction: meta.qualified.clone(),
                port: self.core.ports[port.0].qualified.clone(),
            };
            self.raise(err);
            return;
        }
        let decl = &self.core.ports[port.0];
        if value.kind() != decl.kind {
            let err = RuntimeError::PayloadKind {
                target: decl.qualified.clone(),
                expected: decl.kind,
                actual: value.kind(),
            };
            self.raise(err);
            return;
        }
        if std::mem::replace(&mut self.core.written[port.0], true) {
            let err = RuntimeError::DuplicateWrite {
                target: decl.qualified.clone(),
                tag: self.core.tag,
            };
            self.raise(err);
            return;
        }
        let source = decl.qualified.clone();
        self.core
            .record(source, TraceKind::PortWrite, value.to_string());
        for i in 0..self.core.fanout[port.0].len() {
            let (dst, delay) = self.core.fanout[port.0][i];
            let tag = self.core.tag.delayed(delay);
            if let Err(e) = self
                .core
                .enqueue(tag, Trigger::Port(dst), Some(value.clone()))
            {
                self.raise(e);
            }
        }
    }

    /// Schedules a logical action `delay_ns` after the current tag (next
    /// microstep when zero). Returns the tag it will fire at.
    pub fn schedule(&mut self, action: ActionId, delay_ns: u64, value: V) -> Tag {
        let tag = self.core.tag.delayed(delay_ns);
        if let Err(e) = self.core.enqueue(tag, Trigger::Action(action), Some(value)) {
            self.raise(e);
        }
        tag
    }

    /// Schedules an event at an absolute tag strictly after the current one.
    pub fn schedule_at(
        &mut self,
        target: Trigger,
        tag: Tag,
        payload: Option<V>,
    ) -> Result<(), RuntimeError> {
        if tag <= self.core.tag {
            return Err(RuntimeError::PastTag {
                requested: tag,
                current: self.core.tag,
            });
        }
        self.core.enqueue(tag, target, payload)
    }

    /// Compares a supplied physical elapsed time against this reaction's
    /// deadline. On violation a deadline-miss event is traced and the
    /// deadline handler runs once the body returns.
    pub fn check_deadline(&mut self, elapsed_ns: u64) -> DeadlineStatus {
        let meta = &self.core.metas[self.reaction];
        let Some(deadline_ns) = meta.deadline_ns else {
            return DeadlineStatus::Met;
        };
        let status = check_deadline(elapsed_ns, deadline_ns);
        if status.is_violated() && !self.core.deadline_violated {
            self.core.deadline_violated = true;
            let source = meta.qualified.clone();
            self.core.record(
                source,
                TraceKind::DeadlineMiss,
                format!("elapsed_ns={elapsed_ns} deadline_ns={deadline_ns}"),
            );
        }
        status
    }

    pub fn deadline_ns(&self) -> Option<u64> {
        self.core.metas[self.reaction].deadline_ns
    }

    /// Appends an application-level event, attributed to this reactor.
    pub fn trace(&mut self, kind: TraceKind, payload: impl fmt::Display) {
        let source = self.reactor_name().to_owned();
        self.core.record(source, kind, payload.to_string());
    }

    /// Aborts the run after this reaction returns.
    pub fn fault(&mut self, reason: impl Into<String>) {
        let err = RuntimeError::Fault {
            tag: self.core.tag,
            source_name: self.core.metas[self.reaction].qualified.clone(),
            reason: reason.into(),
        };
        self.raise(err);
    }

    fn raise(&mut self, err: RuntimeError) {
        self.core.fault.get_or_insert(err);
    }
}

/// A finalized, runnable topology.
pub struct Runtime<V: Payload> {
    core: Core<V>,
    states: Vec<Box<dyn Any>>,
    slots: Vec<ReactionSlot<V>>,
    order: Vec<usize>,
    position: Vec<usize>,
    by_trigger: BTreeMap<Trigger, Vec<usize>>,
    current: Option<Tag>,
}

impl<V: Payload> Runtime<V> {
    /// Last processed tag, `None` before the first one.
    pub fn current_tag(&self) -> Option<Tag> {
        self.current
    }

    /// Injects an external event. Must lie strictly after the current tag.
    pub fn schedule(&mut self, event: Event<V>) -> Result<(), RuntimeError> {
        if let Some(current) = self.current {
            if event.tag <= current {
                return Err(RuntimeError::PastTag {
                    requested: event.tag,
                    current,
                });
            }
        }
        self.core.enqueue(event.tag, event.target, event.payload)
    }

    /// Tags of queued events, in processing order.
    pub fn pending_tags(&self) -> Vec<Tag> {
        self.core.queue.keys().copied().collect()
    }

    /// Processes every queued event with `time_ns <= horizon_ns` in tag
    /// order and returns the full trace so far. Afterwards the current tag is
    /// at least `(horizon_ns, 0)`.
    pub fn run_until(&mut self, horizon_ns: u64) -> Result<&[TraceEvent], RuntimeError> {
        while let Some(entry) = self.core.queue.first_entry() {
            if entry.key().time_ns > horizon_ns {
                break;
            }
            let (tag, mut events) = entry.remove_entry();
            self.step(tag, &mut events)?;
        }
        // logical time has reached the horizon even if nothing happened there
        self.current = self.current.max(Some(Tag::at(horizon_ns)));
        Ok(&self.core.trace)
    }

    fn step(&mut self, tag: Tag, events: &mut [(Trigger, Option<V>)]) -> Result<(), RuntimeError> {
        debug_assert!(self.current.is_none_or(|c| c < tag));
        self.current = Some(tag);
        self.core.tag = tag;
        self.core.clear_presence();

        events.sort_by_key(|(t, _)| *t);
        let mut triggered = BTreeSet::new();
        for (target, payload) in events.iter_mut() {
            match *target {
                Trigger::Port(p) => self.core.port_values[p.0] = payload.take(),
                Trigger::Action(a) => self.core.action_values[a.0] = payload.take(),
                Trigger::Timer(t) => {
                    self.core.timer_present[t.0] = true;
                    let decl = &self.core.timers[t.0];
                    let (source, next) = (
                        decl.qualified.clone(),
                        Tag::at(tag.time_ns + decl.period_ns),
                    );
                    self.core
                        .record(source, TraceKind::TimerFire, String::new());
                    self.core.enqueue(next, *target, None)?;
                }
            }
            if let Some(rs) = self.by_trigger.get(target) {
                triggered.extend(rs.iter().map(|&r| self.position[r]));
            }
        }

        for pos in triggered {
            let r = self.order[pos];
            let owner = self.core.metas[r].owner.0;
            let state = self.states[owner].as_mut();
            let slot = &mut self.slots[r];
            self.core.deadline_violated = false;
            let mut ctx = Ctx {
                core: &mut self.core,
                reaction: r,
            };
            (slot.body)(state, &mut ctx);
            if ctx.core.deadline_violated && ctx.core.fault.is_none() {
                if let Some(handler) = slot.handler.as_mut() {
                    handler(state, &mut ctx);
                }
            }
            if let Some(fault) = self.core.fault.take() {
                return Err(fault);
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.core.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.core.trace)
    }

    pub fn state<S: 'static>(&self, reactor: ReactorHandle<S>) -> &S {
        self.states[reactor.id.0]
            .downcast_ref()
            .expect("reactor state type is fixed by its handle")
    }

    pub fn state_mut<S: 'static>(&mut self, reactor: ReactorHandle<S>) -> &mut S {
        downcast(self.states[reactor.id.0].as_mut())
    }

    /// Qualified reaction names in execution order.
    pub fn reaction_order(&self) -> Vec<&str> {
        self.order
            .iter()
            .map(|&r| self.core.metas[r].qualified.as_str())
            .collect()
    }
}
