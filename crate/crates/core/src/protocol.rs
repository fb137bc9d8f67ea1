//! Agent program framework: counters, guarded `Explore` states and the
//! per-activation interpreter.
//!
//! A program is a [`Machine`]: states carrying a direction expression and an
//! ordered guard list, plus optional entry and resume code. One activation
//! updates the counters from the snapshot, resumes or enters states, and
//! evaluates guards until a state settles on an action.
//!
//! Transition semantics:
//! - entry code sees the counters of the state being left;
//! - `Etime`/`Esteps` restart after entry, unless the state continues the
//!   current exploration epoch;
//! - guards of a newly entered state are evaluated on the same snapshot;
//! - a guard targeting a state already entered during this activation is
//!   treated as false.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{Action, LocalDir, SeenPos, Snapshot};
use crate::symmetry::{self, AgentId, DirectionSchedule};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("program {machine} has no state {state:?}")]
    UnknownState { machine: &'static str, state: StateName },
    #[error("terminated program was activated")]
    AlreadyTerminated,
    #[error("program {machine} did not settle within one activation")]
    TransitionLoop { machine: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateName {
    Init,
    InitL,
    Bounce,
    Reverse,
    Forward,
    Return,
    BComm,
    FComm,
    Happy,
    FirstBlock,
    FirstBlockL,
    AtLandmark,
    AtLandmarkL,
    Ready,
    MeetingR,
    MeetingB,
    Terminate,
}

/// One-round hold used by signalling and waiting states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Latch {
    TerminateNext,
    BounceWait,
    ForwardWait,
    LandmarkWait,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Counters {
    /// Activations since start (or since a restart).
    pub ttime: u64,
    /// Successful moves since start.
    pub tsteps: u64,
    /// Activations since the current state was entered.
    pub etime: u64,
    /// Successful moves since the current state was entered.
    pub esteps: u64,
    /// Consecutive failed move attempts.
    pub btime: u64,
    /// Activations since the ring size became known.
    pub ntime: u64,
    /// Activations since start, never reset.
    pub activations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Registers {
    /// Size bound `N`: a parameter, or the current estimate.
    pub bound: u64,
    pub dir: Option<LocalDir>,
    /// Heading at the first catch; shared states orient against it.
    pub base: Option<LocalDir>,
    pub forward_role: Option<bool>,
    pub t_sl: u64,
    pub left_steps: u64,
    pub right_steps: u64,
    pub bounce_steps: u64,
    pub return_steps: u64,
    pub d: u64,
    pub r1: u64,
    pub r2: u64,
    pub r3: u64,
    pub id: Option<AgentId>,
    pub schedule: Option<DirectionSchedule>,
    /// `Reverse` was entered with the ring size already known.
    pub reverse_fixed: bool,
    pub landmark_seen: bool,
    pub disp: i64,
    pub known_n: Option<u64>,
    pub latch: Option<Latch>,
}

pub type EntryFn = fn(&mut ProgramState, &Snapshot) -> Flow;
pub type ResumeFn = fn(&mut ProgramState, &Snapshot, Latch) -> Flow;

/// Control returned by entry and resume code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// Evaluate the current state's guards and explore.
    Explore,
    Goto(StateName),
    Terminate,
    /// Perform this action now, skipping guards.
    Act(Action),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Ge,
    Gt,
    Eq,
}

impl Cmp {
    fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expr {
    Const(u64),
    /// `k * N`.
    Bound(u64),
    /// `k * n`, undefined while `n` is unknown.
    KnownN(u64),
    /// Exploration deadline for the known `n`, plus an offset.
    Deadline(u64),
}

impl Expr {
    fn eval(self, regs: &Registers) -> Option<u64> {
        match self {
            Expr::Const(c) => Some(c),
            Expr::Bound(k) => Some(k * regs.bound),
            Expr::KnownN(k) => regs.known_n.map(|n| k * n),
            Expr::Deadline(off) => regs.known_n.map(|n| symmetry::exploration_deadline(n) + off),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counter {
    Ttime,
    Tsteps,
    Etime,
    Esteps,
    Btime,
    Ntime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Compare(Counter, Cmp, Expr),
    EtimeAboveTwiceEsteps,
    Meeting,
    Catches,
    Catched,
    /// Arrived at the landmark with the last move.
    ArrivedAtLandmark,
    KnownN,
    ReverseFixed,
    /// The reversal schedule changes direction at the current `Ttime`.
    Switch,
    Any(Vec<Predicate>),
    All(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn ge(c: Counter, e: Expr) -> Self {
        Predicate::Compare(c, Cmp::Ge, e)
    }

    pub fn gt(c: Counter, e: Expr) -> Self {
        Predicate::Compare(c, Cmp::Gt, e)
    }

    pub fn eq(c: Counter, e: Expr) -> Self {
        Predicate::Compare(c, Cmp::Eq, e)
    }

    /// Whether the predicate reads `meeting`, `catches` or `catched`.
    pub fn observes_event(&self) -> bool {
        match self {
            Predicate::Meeting | Predicate::Catches | Predicate::Catched => true,
            Predicate::Any(ps) | Predicate::All(ps) => ps.iter().any(Predicate::observes_event),
            Predicate::Not(p) => p.observes_event(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    State(StateName),
    Terminate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub when: Predicate,
    pub then: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirExpr {
    Left,
    Right,
    /// The `dir` register.
    Dir,
    OppDir,
    /// The `base` register.
    Base,
    OppBase,
}

/// The `Explore(dir | p1: s1; ...)` part of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedExplore {
    pub direction: DirExpr,
    pub guards: Vec<Guard>,
}

#[derive(Debug, Clone)]
pub struct StateDef {
    pub name: StateName,
    pub explore: GuardedExplore,
    pub entry: Option<EntryFn>,
    pub resume: Option<ResumeFn>,
    /// Do not restart `Etime`/`Esteps` on entry.
    pub keep_epoch: bool,
}

impl StateDef {
    pub fn new(name: StateName, direction: DirExpr, guards: Vec<(Predicate, Target)>) -> Self {
        Self {
            name,
            explore: GuardedExplore {
                direction,
                guards: guards
                    .into_iter()
                    .map(|(when, then)| Guard { when, then })
                    .collect(),
            },
            entry: None,
            resume: None,
            keep_epoch: false,
        }
    }

    pub fn on_entry(mut self, f: EntryFn) -> Self {
        self.entry = Some(f);
        self
    }

    pub fn on_resume(mut self, f: ResumeFn) -> Self {
        self.resume = Some(f);
        self
    }

    pub fn keep_epoch(mut self) -> Self {
        self.keep_epoch = true;
        self
    }
}

#[derive(Debug)]
pub struct Machine {
    pub name: &'static str,
    pub initial: StateName,
    /// Track landmark displacement and learn `n`.
    pub lexplore: bool,
    pub states: Vec<StateDef>,
}

impl Machine {
    pub fn state(&self, name: StateName) -> Result<&StateDef, ProtocolError> {
        self.states
            .iter()
            .find(|s| s.name == name)
            .ok_or(ProtocolError::UnknownState {
                machine: self.name,
                state: name,
            })
    }
}

/// Private memory and control state of one agent.
#[derive(Clone)]
pub struct ProgramState {
    pub machine: &'static Machine,
    pub state: StateName,
    pub regs: Registers,
    pub counters: Counters,
    /// Direction of the last move request.
    pub heading: LocalDir,
    pub last_action: Option<Action>,
    pub started: bool,
}

impl fmt::Debug for ProgramState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProgramState")
            .field("machine", &self.machine.name)
            .field("state", &self.state)
            .field("regs", &self.regs)
            .field("counters", &self.counters)
            .field("heading", &self.heading)
            .field("last_action", &self.last_action)
            .finish()
    }
}

impl PartialEq for ProgramState {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.machine, other.machine)
            && self.state == other.state
            && self.regs == other.regs
            && self.counters == other.counters
            && self.heading == other.heading
            && self.last_action == other.last_action
            && self.started == other.started
    }
}

impl Eq for ProgramState {}

impl Hash for ProgramState {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.machine.name.hash(h);
        self.state.hash(h);
        self.regs.hash(h);
        self.counters.hash(h);
        self.heading.hash(h);
        self.last_action.hash(h);
        self.started.hash(h);
    }
}

impl ProgramState {
    pub fn new(machine: &'static Machine, bound: u64) -> Self {
        Self {
            machine,
            state: machine.initial,
            regs: Registers {
                bound,
                ..Registers::default()
            },
            counters: Counters::default(),
            heading: LocalDir::Left,
            last_action: None,
            started: false,
        }
    }

    pub fn is_terminated(&self) -> bool {
        self.state == StateName::Terminate
    }

    pub fn dir(&self) -> LocalDir {
        self.regs.dir.unwrap_or(LocalDir::Left)
    }

    pub fn base(&self) -> LocalDir {
        self.regs.base.unwrap_or(LocalDir::Left)
    }

    fn resolve(&self, d: DirExpr) -> LocalDir {
        match d {
            DirExpr::Left => LocalDir::Left,
            DirExpr::Right => LocalDir::Right,
            DirExpr::Dir => self.dir(),
            DirExpr::OppDir => self.dir().opposite(),
            DirExpr::Base => self.base(),
            DirExpr::OppBase => self.base().opposite(),
        }
    }

    fn counter(&self, c: Counter) -> Option<u64> {
        let k = &self.counters;
        match c {
            Counter::Ttime => Some(k.ttime),
            Counter::Tsteps => Some(k.tsteps),
            Counter::Etime => Some(k.etime),
            Counter::Esteps => Some(k.esteps),
            Counter::Btime => Some(k.btime),
            Counter::Ntime => self.regs.known_n.map(|_| k.ntime),
        }
    }
}

/// `meeting`, `catches` and `catched` for one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventFlags {
    pub meeting: bool,
    pub catches: bool,
    pub catched: bool,
}

/// Event predicates relative to the observer's travel direction.
///
/// - `catches`: I am in the interior after a move attempt (successful, or
///   denied because the port was taken) and another agent sits on the port
///   I am heading to.
/// - `meeting`: I arrived and another agent arrived here at the same time.
/// - `catched`: my move failed, I sit on a port, and another agent is in the
///   interior.
///
/// `attempted` tells whether the previous action was a move.
pub fn evaluate_event_predicates(snapshot: &Snapshot, heading: LocalDir, attempted: bool) -> EventFlags {
    let interior = snapshot.my_pos.is_none();
    let arrived = interior && snapshot.my_moved;
    let ahead = match heading {
        LocalDir::Left => SeenPos::Left,
        LocalDir::Right => SeenPos::Right,
    };
    let in_node = |fresh: bool| {
        snapshot
            .others
            .iter()
            .any(|o| o.pos == SeenPos::Interior && (o.moved || !fresh))
    };
    EventFlags {
        catches: interior
            && (arrived || attempted)
            && snapshot.others.iter().any(|o| o.pos == ahead),
        meeting: arrived && in_node(true),
        catched: snapshot.my_pos.is_some() && !snapshot.my_moved && in_node(false),
    }
}

/// Landmark bookkeeping: start the displacement count at the first visit,
/// and learn `n` when returning with a non-zero displacement.
pub fn lexplore_update(state: &mut ProgramState, snapshot: &Snapshot, stepped: Option<LocalDir>) {
    let regs = &mut state.regs;
    if regs.landmark_seen {
        if let Some(d) = stepped {
            regs.disp += d.sign();
        }
    }
    if snapshot.is_landmark {
        if !regs.landmark_seen {
            regs.landmark_seen = true;
            regs.disp = 0;
        } else if regs.disp != 0 && regs.known_n.is_none() {
            regs.known_n = Some(regs.disp.unsigned_abs());
            state.counters.ntime = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub action: Action,
    pub flags: EventFlags,
}

struct Activation<'a> {
    snapshot: &'a Snapshot,
    flags: EventFlags,
    entered: Vec<StateName>,
}

const MAX_TRANSITIONS: usize = 32;

/// Runs one activation of an agent program.
pub fn protocol_step(
    state: &mut ProgramState,
    snapshot: &Snapshot,
) -> Result<StepOutcome, ProtocolError> {
    if state.is_terminated() {
        return Err(ProtocolError::AlreadyTerminated);
    }
    let first = !state.started;
    let mut stepped = None;
    if first {
        state.started = true;
    } else {
        let k = &mut state.counters;
        k.ttime += 1;
        k.etime += 1;
        k.activations += 1;
        if state.regs.known_n.is_some() {
            k.ntime += 1;
        }
        match state.last_action {
            Some(Action::Move(d)) if snapshot.my_moved => {
                k.tsteps += 1;
                k.esteps += 1;
                k.btime = 0;
                stepped = Some(d);
            }
            Some(Action::Move(_)) => k.btime += 1,
            _ => k.btime = 0,
        }
    }
    if state.machine.lexplore {
        lexplore_update(state, snapshot, stepped);
    }
    let attempted = matches!(state.last_action, Some(Action::Move(_)));
    let flags = evaluate_event_predicates(snapshot, state.heading, attempted);
    let mut act = Activation {
        snapshot,
        flags,
        entered: Vec::new(),
    };
    let flow = if first {
        transition(state, &mut act, state.machine.initial)?
    } else if let Some(latch) = state.regs.latch.take() {
        match state.machine.state(state.state)?.resume {
            Some(resume) => resume(state, snapshot, latch),
            None => Flow::Explore,
        }
    } else {
        Flow::Explore
    };
    let action = drive(state, &mut act, flow)?;
    Ok(StepOutcome { action, flags })
}

fn transition(
    state: &mut ProgramState,
    act: &mut Activation<'_>,
    to: StateName,
) -> Result<Flow, ProtocolError> {
    act.entered.push(to);
    let def = state.machine.state(to)?;
    state.state = to;
    let flow = match def.entry {
        Some(entry) => entry(state, act.snapshot),
        None => Flow::Explore,
    };
    if !def.keep_epoch {
        state.counters.etime = 0;
        state.counters.esteps = 0;
    }
    if flow == Flow::Explore && state.state == to {
        if state.resolve(def.explore.direction) != state.heading {
            state.counters.btime = 0;
        }
    }
    Ok(flow)
}

fn drive(
    state: &mut ProgramState,
    act: &mut Activation<'_>,
    mut flow: Flow,
) -> Result<Action, ProtocolError> {
    for _ in 0..MAX_TRANSITIONS {
        match flow {
            Flow::Act(action) => return Ok(finish(state, action)),
            Flow::Terminate => return Ok(finish(state, Action::Terminate)),
            Flow::Goto(s) => flow = transition(state, act, s)?,
            Flow::Explore => {
                let def = state.machine.state(state.state)?;
                let fired = def.explore.guards.iter().find(|g| {
                    let revisit = matches!(g.then, Target::State(s) if act.entered.contains(&s));
                    !revisit && holds(state, act, &g.when)
                });
                let Some(guard) = fired else {
                    let d = state.resolve(def.explore.direction);
                    return Ok(finish(state, Action::Move(d)));
                };
                // An observed event drives at most one guarded transition.
                if guard.when.observes_event() {
                    act.flags = EventFlags::default();
                }
                match guard.then {
                    Target::Terminate => flow = Flow::Terminate,
                    Target::State(s) => flow = Flow::Goto(s),
                }
            }
        }
    }
    Err(ProtocolError::TransitionLoop {
        machine: state.machine.name,
    })
}

fn finish(state: &mut ProgramState, action: Action) -> Action {
    match action {
        Action::Move(d) => {
            if d != state.heading {
                state.counters.btime = 0;
            }
            state.heading = d;
        }
        Action::Terminate => {
            state.state = StateName::Terminate;
            state.regs.latch = None;
        }
        Action::Stay => {}
    }
    state.last_action = Some(action);
    action
}

fn holds(state: &ProgramState, act: &Activation<'_>, p: &Predicate) -> bool {
    match p {
        Predicate::Compare(c, cmp, e) => match (state.counter(*c), e.eval(&state.regs)) {
            (Some(lhs), Some(rhs)) => cmp.holds(lhs, rhs),
            _ => false,
        },
        Predicate::EtimeAboveTwiceEsteps => state.counters.etime > 2 * state.counters.esteps,
        Predicate::Meeting => act.flags.meeting,
        Predicate::Catches => act.flags.catches,
        Predicate::Catched => act.flags.catched,
        Predicate::ArrivedAtLandmark => act.snapshot.is_landmark && act.snapshot.my_moved,
        Predicate::KnownN => state.regs.known_n.is_some(),
        Predicate::ReverseFixed => state.regs.reverse_fixed,
        Predicate::Switch => state
            .regs
            .schedule
            .as_ref()
            .is_some_and(|s| s.switch(state.counters.ttime)),
        Predicate::Any(ps) => ps.iter().any(|q| holds(state, act, q)),
        Predicate::All(ps) => ps.iter().all(|q| holds(state, act, q)),
        Predicate::Not(q) => !holds(state, act, q),
    }
}
