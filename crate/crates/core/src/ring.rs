//! The dynamic ring: topology, agent placement and the synchronous round.
//!
//! Global coordinates (node indices, `PortMinus`/`PortPlus`) exist only in
//! this module and in the adversary. Agent programs only ever receive a
//! [`Snapshot`] expressed in their private orientation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{self, ProgramState, ProtocolError};

pub type NodeId = usize;
/// Edge `i` joins node `i` and node `(i + 1) mod n`.
pub type EdgeId = usize;
/// Simulation-only agent index. Never visible to programs.
pub type AgentIndex = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("ring size must be at least 3, got {0}")]
    RingTooSmall(usize),
    #[error("landmark {landmark} out of range for ring of size {n}")]
    LandmarkOutOfRange { landmark: NodeId, n: usize },
    #[error("at least one agent is required")]
    NoAgents,
    #[error("{starts} start nodes but {orientations} orientations")]
    LengthMismatch { starts: usize, orientations: usize },
    #[error("start node {node} out of range for ring of size {n}")]
    OutOfRange { node: NodeId, n: usize },
}

/// Direction in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalDir {
    /// Toward node `i - 1`.
    Minus,
    /// Toward node `i + 1`.
    Plus,
}

impl GlobalDir {
    pub fn opposite(self) -> Self {
        match self {
            GlobalDir::Minus => GlobalDir::Plus,
            GlobalDir::Plus => GlobalDir::Minus,
        }
    }
}

/// Direction in an agent's private frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalDir {
    Left,
    Right,
}

impl LocalDir {
    pub fn opposite(self) -> Self {
        match self {
            LocalDir::Left => LocalDir::Right,
            LocalDir::Right => LocalDir::Left,
        }
    }

    /// Signed unit step used for landmark displacement tracking.
    pub fn sign(self) -> i64 {
        match self {
            LocalDir::Left => -1,
            LocalDir::Right => 1,
        }
    }
}

/// Maps an agent's private "left" to a global direction.
///
/// Serialized as `1` (left is global minus) or `-1` (left is global plus).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Orientation {
    Positive,
    Negative,
}

impl TryFrom<i8> for Orientation {
    type Error = String;

    fn try_from(value: i8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Orientation::Positive),
            -1 => Ok(Orientation::Negative),
            other => Err(format!("orientation must be 1 or -1, got {other}")),
        }
    }
}

impl From<Orientation> for i8 {
    fn from(o: Orientation) -> i8 {
        match o {
            Orientation::Positive => 1,
            Orientation::Negative => -1,
        }
    }
}

impl Orientation {
    pub fn to_global(self, dir: LocalDir) -> GlobalDir {
        match (self, dir) {
            (Orientation::Positive, LocalDir::Left) => GlobalDir::Minus,
            (Orientation::Positive, LocalDir::Right) => GlobalDir::Plus,
            (Orientation::Negative, LocalDir::Left) => GlobalDir::Plus,
            (Orientation::Negative, LocalDir::Right) => GlobalDir::Minus,
        }
    }

    pub fn to_local(self, dir: GlobalDir) -> LocalDir {
        match (self, dir) {
            (Orientation::Positive, GlobalDir::Minus) => LocalDir::Left,
            (Orientation::Positive, GlobalDir::Plus) => LocalDir::Right,
            (Orientation::Negative, GlobalDir::Plus) => LocalDir::Left,
            (Orientation::Negative, GlobalDir::Minus) => LocalDir::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingTopology {
    n: usize,
    landmark: Option<NodeId>,
}

impl RingTopology {
    pub fn new(n: usize, landmark: Option<NodeId>) -> Result<Self, ModelError> {
        if n < 3 {
            return Err(ModelError::RingTooSmall(n));
        }
        if let Some(l) = landmark {
            if l >= n {
                return Err(ModelError::LandmarkOutOfRange { landmark: l, n });
            }
        }
        Ok(Self { n, landmark })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn landmark(&self) -> Option<NodeId> {
        self.landmark
    }

    pub fn neighbor(&self, node: NodeId, dir: GlobalDir) -> NodeId {
        match dir {
            GlobalDir::Minus => (node + self.n - 1) % self.n,
            GlobalDir::Plus => (node + 1) % self.n,
        }
    }

    /// The edge leaving `node` in direction `dir`.
    pub fn edge_toward(&self, node: NodeId, dir: GlobalDir) -> EdgeId {
        match dir {
            GlobalDir::Minus => (node + self.n - 1) % self.n,
            GlobalDir::Plus => node,
        }
    }

    pub fn is_landmark(&self, node: NodeId) -> bool {
        self.landmark == Some(node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Interior,
    PortMinus,
    PortPlus,
}

impl Slot {
    pub fn port(dir: GlobalDir) -> Self {
        match dir {
            GlobalDir::Minus => Slot::PortMinus,
            GlobalDir::Plus => Slot::PortPlus,
        }
    }

    pub fn port_dir(self) -> Option<GlobalDir> {
        match self {
            Slot::Interior => None,
            Slot::PortMinus => Some(GlobalDir::Minus),
            Slot::PortPlus => Some(GlobalDir::Plus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    Running,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentPhysical {
    pub index: AgentIndex,
    pub node: NodeId,
    pub slot: Slot,
    pub orientation: Orientation,
    /// Outcome of the last attempted move.
    pub moved: bool,
    pub status: AgentStatus,
    /// A move happened that the agent has not yet observed in a Look.
    pub unobserved_move: bool,
}

impl AgentPhysical {
    pub fn is_running(&self) -> bool {
        self.status == AgentStatus::Running
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub topology: RingTopology,
    pub round: u64,
    pub agents: Vec<AgentPhysical>,
    pub missing_edge: Option<EdgeId>,
    pub visited: Vec<bool>,
}

/// Places agents in the interior of their start nodes at round 0.
pub fn new_configuration(
    topology: RingTopology,
    starts: &[NodeId],
    orientations: &[Orientation],
) -> Result<Configuration, ModelError> {
    if starts.is_empty() {
        return Err(ModelError::NoAgents);
    }
    if starts.len() != orientations.len() {
        return Err(ModelError::LengthMismatch {
            starts: starts.len(),
            orientations: orientations.len(),
        });
    }
    let n = topology.n();
    let mut visited = vec![false; n];
    let mut agents = Vec::with_capacity(starts.len());
    for (index, (&node, &orientation)) in starts.iter().zip(orientations).enumerate() {
        if node >= n {
            return Err(ModelError::OutOfRange { node, n });
        }
        visited[node] = true;
        agents.push(AgentPhysical {
            index,
            node,
            slot: Slot::Interior,
            orientation,
            moved: false,
            status: AgentStatus::Running,
            unobserved_move: false,
        });
    }
    Ok(Configuration {
        topology,
        round: 0,
        agents,
        missing_edge: None,
        visited,
    })
}

impl Configuration {
    pub fn n(&self) -> usize {
        self.topology.n()
    }

    pub fn running(&self) -> impl Iterator<Item = &AgentPhysical> {
        self.agents.iter().filter(|a| a.is_running())
    }

    pub fn running_indices(&self) -> Vec<AgentIndex> {
        self.running().map(|a| a.index).collect()
    }

    pub fn all_terminated(&self) -> bool {
        self.agents.iter().all(|a| !a.is_running())
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    /// The edge under an agent's current port, if it sits on one.
    pub fn port_edge(&self, agent: &AgentPhysical) -> Option<EdgeId> {
        agent
            .slot
            .port_dir()
            .map(|d| self.topology.edge_toward(agent.node, d))
    }
}

/// True iff every node has been visited by at least one agent.
pub fn is_explored(config: &Configuration) -> bool {
    config.visited.iter().all(|&v| v)
}

/// Position of a co-located agent as seen by the observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeenPos {
    Left,
    Right,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observed {
    pub pos: SeenPos,
    /// Whether that agent's last attempted move succeeded.
    pub moved: bool,
}

/// What one agent sees in its Look phase, in its own orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    /// `None` means the agent is in the node interior.
    pub my_pos: Option<LocalDir>,
    pub is_landmark: bool,
    pub others: Vec<Observed>,
    pub my_moved: bool,
}

impl Snapshot {
    pub fn other_in_interior(&self) -> bool {
        self.others.iter().any(|o| o.pos == SeenPos::Interior)
    }

    pub fn others_present(&self) -> bool {
        !self.others.is_empty()
    }
}

pub fn take_snapshot(config: &Configuration, agent: AgentIndex) -> Snapshot {
    let me = &config.agents[agent];
    let frame = me.orientation;
    let local_slot = |slot: Slot| slot.port_dir().map(|d| frame.to_local(d));
    // Sorted so that the observation never leaks internal agent indices.
    let mut others: Vec<Observed> = config
        .agents
        .iter()
        .filter(|a| a.index != agent && a.node == me.node)
        .map(|a| Observed {
            pos: match local_slot(a.slot) {
                None => SeenPos::Interior,
                Some(LocalDir::Left) => SeenPos::Left,
                Some(LocalDir::Right) => SeenPos::Right,
            },
            moved: a.moved,
        })
        .collect();
    others.sort_by_key(|o| (o.pos as u8, o.moved));
    Snapshot {
        my_pos: local_slot(me.slot),
        is_landmark: config.topology.is_landmark(me.node),
        others,
        my_moved: me.moved,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Synchrony {
    Fsync,
    Ssync,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    /// Passive transport of sleeping agents across present edges.
    Pt,
    /// Eventual activation while the edge is present.
    Et,
    /// No guarantee for agents sleeping on ports.
    Ns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecutionModel {
    pub synchrony: Synchrony,
    pub transport: Transport,
    pub fairness_window: u32,
}

impl ExecutionModel {
    pub fn fsync() -> Self {
        Self {
            synchrony: Synchrony::Fsync,
            transport: Transport::Pt,
            fairness_window: 1,
        }
    }

    pub fn ssync(transport: Transport, fairness_window: u32) -> Self {
        Self {
            synchrony: Synchrony::Ssync,
            transport,
            fairness_window,
        }
    }

    pub fn passive_transport(&self) -> bool {
        self.synchrony == Synchrony::Ssync && self.transport == Transport::Pt
    }
}

/// One round of adversarial choices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdversaryDecision {
    /// Valid decisions carry at most one edge.
    pub missing: Vec<EdgeId>,
    pub active: Vec<AgentIndex>,
    /// Priority order for port requests. Empty means ascending index.
    pub tie_break: Vec<AgentIndex>,
}

impl AdversaryDecision {
    pub fn new(missing: Option<EdgeId>, active: Vec<AgentIndex>) -> Self {
        Self {
            missing: missing.into_iter().collect(),
            active,
            tie_break: Vec::new(),
        }
    }

    pub fn with_tie_break(mut self, order: Vec<AgentIndex>) -> Self {
        self.tie_break = order;
        self
    }

    pub fn missing_edge(&self) -> Option<EdgeId> {
        self.missing.first().copied()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionViolation {
    #[error("{count} edges missing in one round")]
    TooManyMissingEdges { count: usize },
    #[error("edge {edge} does not exist")]
    EdgeOutOfRange { edge: EdgeId },
    #[error("active set is empty")]
    EmptyActiveSet,
    #[error("agent {agent} does not exist")]
    UnknownAgent { agent: AgentIndex },
    #[error("terminated agent {agent} was activated")]
    TerminatedAgentActivated { agent: AgentIndex },
    #[error("agent {agent} listed twice in active set")]
    DuplicateActivation { agent: AgentIndex },
    #[error("FSYNC requires every running agent to be active; agent {agent} is not")]
    NotFullySynchronous { agent: AgentIndex },
    #[error("agent {agent} idle for {idle} consecutive rounds (window {window})")]
    FairnessWindow { agent: AgentIndex, idle: u64, window: u32 },
    #[error("tie-break order is not a permutation of the agents")]
    BadTieBreak,
}

/// Per-agent activation bookkeeping needed by fairness and ET checks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationHistory {
    /// Consecutive rounds each agent has been inactive, up to the last round.
    pub idle: Vec<u64>,
    /// Round since which an agent has slept on a port whose edge stayed
    /// present, without being activated. Cleared by activation, edge removal
    /// or leaving the port.
    pub et_debt: Vec<Option<u64>>,
}

impl ActivationHistory {
    pub fn new(agents: usize) -> Self {
        Self {
            idle: vec![0; agents],
            et_debt: vec![None; agents],
        }
    }

    /// Records a decision that has already been applied to `after`.
    pub fn record(&mut self, decision: &AdversaryDecision, after: &Configuration) {
        let mut active = vec![false; self.idle.len()];
        for &a in &decision.active {
            if a < active.len() {
                active[a] = true;
            }
        }
        let missing = decision.missing_edge();
        for agent in &after.agents {
            let i = agent.index;
            if active[i] || !agent.is_running() {
                self.idle[i] = 0;
            } else {
                self.idle[i] += 1;
            }
            let edge = after.port_edge(agent);
            let owes = agent.is_running() && !active[i] && edge.is_some() && edge != missing;
            if owes {
                self.et_debt[i].get_or_insert(after.round.saturating_sub(1));
            } else if active[i] || edge.is_none() || edge == missing || !agent.is_running() {
                self.et_debt[i] = None;
            }
        }
    }
}

pub fn validate_decision(
    decision: &AdversaryDecision,
    config: &Configuration,
    model: &ExecutionModel,
    history: &ActivationHistory,
) -> Result<(), DecisionViolation> {
    let n = config.n();
    let m = config.agents.len();
    if decision.missing.len() > 1 {
        return Err(DecisionViolation::TooManyMissingEdges {
            count: decision.missing.len(),
        });
    }
    if let Some(&edge) = decision.missing.first() {
        if edge >= n {
            return Err(DecisionViolation::EdgeOutOfRange { edge });
        }
    }
    if decision.active.is_empty() {
        return Err(DecisionViolation::EmptyActiveSet);
    }
    let mut seen = vec![false; m];
    for &a in &decision.active {
        if a >= m {
            return Err(DecisionViolation::UnknownAgent { agent: a });
        }
        if seen[a] {
            return Err(DecisionViolation::DuplicateActivation { agent: a });
        }
        seen[a] = true;
        if !config.agents[a].is_running() {
            return Err(DecisionViolation::TerminatedAgentActivated { agent: a });
        }
    }
    if !decision.tie_break.is_empty() {
        let mut order = decision.tie_break.clone();
        order.sort_unstable();
        if order != (0..m).collect::<Vec<_>>() {
            return Err(DecisionViolation::BadTieBreak);
        }
    }
    for agent in config.running() {
        let i = agent.index;
        if seen[i] {
            continue;
        }
        if model.synchrony == Synchrony::Fsync {
            return Err(DecisionViolation::NotFullySynchronous { agent: i });
        }
        let idle = history.idle.get(i).copied().unwrap_or(0) + 1;
        if idle >= u64::from(model.fairness_window) {
            return Err(DecisionViolation::FairnessWindow {
                agent: i,
                idle,
                window: model.fairness_window,
            });
        }
    }
    Ok(())
}

/// Something observable that happened during a round.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Moved { agent: AgentIndex, from: NodeId, to: NodeId, edge: EdgeId },
    Blocked { agent: AgentIndex, node: NodeId, edge: EdgeId },
    PortDenied { agent: AgentIndex, node: NodeId },
    PassiveTransport { agent: AgentIndex, from: NodeId, to: NodeId, edge: EdgeId },
    Terminated { agent: AgentIndex, node: NodeId },
    Meeting { agent: AgentIndex },
    Catches { agent: AgentIndex },
    Catched { agent: AgentIndex },
}

impl Event {
    /// Events that relocate an agent across an edge.
    pub fn moved_agent(&self) -> Option<AgentIndex> {
        match self {
            Event::Moved { agent, .. } | Event::PassiveTransport { agent, .. } => Some(*agent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub events: Vec<Event>,
    /// Snapshots taken by active agents, in activation order.
    pub observations: Vec<(AgentIndex, Snapshot)>,
}

/// The action each active agent chose this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Move(LocalDir),
    Stay,
    Terminate,
}

/// Executes one round in place. The decision must already be validated.
pub fn step_round_in_place(
    config: &mut Configuration,
    programs: &mut [ProgramState],
    decision: &AdversaryDecision,
    model: &ExecutionModel,
) -> Result<RoundOutcome, ProtocolError> {
    let missing = decision.missing_edge();
    config.missing_edge = missing;
    let m = config.agents.len();

    let mut is_active = vec![false; m];
    for &a in &decision.active {
        if config.agents[a].is_running() {
            is_active[a] = true;
        }
    }

    // Look: all snapshots reflect the end of the previous round.
    let mut observations = Vec::with_capacity(decision.active.len());
    for a in 0..m {
        if is_active[a] {
            observations.push((a, take_snapshot(config, a)));
        }
    }

    // Compute.
    let mut events = Vec::new();
    let mut actions: Vec<Option<Action>> = vec![None; m];
    for (a, snap) in &observations {
        let outcome = protocol::protocol_step(&mut programs[*a], snap)?;
        let flags = outcome.flags;
        if flags.meeting {
            events.push(Event::Meeting { agent: *a });
        }
        if flags.catches {
            events.push(Event::Catches { agent: *a });
        }
        if flags.catched {
            events.push(Event::Catched { agent: *a });
        }
        actions[*a] = Some(outcome.action);
        config.agents[*a].unobserved_move = false;
    }

    // Leave ports not wanted any more, collect port requests.
    let mut requests: Vec<(AgentIndex, Slot)> = Vec::new();
    for a in 0..m {
        let Some(action) = actions[a] else { continue };
        let agent = &mut config.agents[a];
        match action {
            Action::Terminate => {
                agent.slot = Slot::Interior;
                agent.moved = false;
                agent.status = AgentStatus::Terminated;
                events.push(Event::Terminated {
                    agent: a,
                    node: agent.node,
                });
            }
            Action::Stay => {
                agent.slot = Slot::Interior;
                agent.moved = false;
            }
            Action::Move(dir) => {
                let want = Slot::port(agent.orientation.to_global(dir));
                if agent.slot != want {
                    agent.slot = Slot::Interior;
                    requests.push((a, want));
                }
            }
        }
    }

    // Port acquisition in mutual exclusion, in tie-break order.
    if !requests.is_empty() {
        let rank = |a: AgentIndex| {
            if decision.tie_break.is_empty() {
                a
            } else {
                decision.tie_break.iter().position(|&x| x == a).unwrap_or(a)
            }
        };
        requests.sort_by_key(|&(a, _)| rank(a));
        for (a, want) in requests {
            let node = config.agents[a].node;
            let taken = config
                .agents
                .iter()
                .any(|o| o.index != a && o.node == node && o.slot == want);
            let agent = &mut config.agents[a];
            if taken {
                agent.moved = false;
                events.push(Event::PortDenied { agent: a, node });
            } else {
                agent.slot = want;
            }
        }
    }

    // Movement of active agents, then passive transport under PT.
    let topology = config.topology;
    for a in 0..m {
        let agent = &mut config.agents[a];
        let Some(dir) = agent.slot.port_dir() else { continue };
        if !agent.is_running() {
            continue;
        }
        let passive = !is_active[a];
        if passive && !model.passive_transport() {
            continue;
        }
        let edge = topology.edge_toward(agent.node, dir);
        if Some(edge) == missing {
            if !passive {
                agent.moved = false;
                events.push(Event::Blocked {
                    agent: a,
                    node: agent.node,
                    edge,
                });
            }
            continue;
        }
        let from = agent.node;
        let to = topology.neighbor(from, dir);
        agent.node = to;
        agent.slot = Slot::Interior;
        agent.moved = true;
        agent.unobserved_move = true;
        config.visited[to] = true;
        events.push(if passive {
            Event::PassiveTransport { agent: a, from, to, edge }
        } else {
            Event::Moved { agent: a, from, to, edge }
        });
    }

    config.round += 1;
    Ok(RoundOutcome {
        events,
        observations,
    })
}

/// Pure form of [`step_round_in_place`].
pub fn step_round(
    config: &Configuration,
    programs: &[ProgramState],
    decision: &AdversaryDecision,
    model: &ExecutionModel,
) -> Result<(Configuration, Vec<ProgramState>, RoundOutcome), ProtocolError> {
    let mut config = config.clone();
    let mut programs = programs.to_vec();
    let outcome = step_round_in_place(&mut config, &mut programs, decision, model)?;
    Ok((config, programs, outcome))
}

/// Port mutual exclusion at a round boundary.
pub fn check_port_exclusion(config: &Configuration) -> Result<(), (NodeId, Slot)> {
    for (i, a) in config.agents.iter().enumerate() {
        if a.slot == Slot::Interior {
            continue;
        }
        if config.agents[i + 1..]
            .iter()
            .any(|b| b.node == a.node && b.slot == a.slot)
        {
            return Err((a.node, a.slot));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{self, AlgorithmParams};

    fn ring(n: usize) -> RingTopology {
        RingTopology::new(n, None).unwrap()
    }

    #[test]
    fn new_configuration_places_agents_interior() {
        let c = new_configuration(ring(3), &[0], &[Orientation::Positive]).unwrap();
        assert_eq!(c.round, 0);
        assert_eq!(c.agents.len(), 1);
        assert_eq!(c.agents[0].node, 0);
        assert_eq!(c.agents[0].slot, Slot::Interior);
        assert!(!c.agents[0].moved);
        assert_eq!(c.visited, vec![true, false, false]);

        let c = new_configuration(
            ring(5),
            &[0, 2],
            &[Orientation::Positive, Orientation::Negative],
        )
        .unwrap();
        assert_eq!(c.agents.len(), 2);
        assert_eq!(c.visited, vec![true, false, true, false, false]);
    }

    #[test]
    fn new_configuration_errors() {
        assert_eq!(
            new_configuration(ring(3), &[7], &[Orientation::Positive]),
            Err(ModelError::OutOfRange { node: 7, n: 3 })
        );
        assert_eq!(new_configuration(ring(3), &[], &[]), Err(ModelError::NoAgents));
        assert_eq!(RingTopology::new(2, None), Err(ModelError::RingTooSmall(2)));
        assert!(RingTopology::new(4, Some(4)).is_err());
    }

    #[test]
    fn orientation_translation_is_consistent() {
        for o in [Orientation::Positive, Orientation::Negative] {
            for d in [LocalDir::Left, LocalDir::Right] {
                assert_eq!(o.to_local(o.to_global(d)), d);
            }
        }
        assert_eq!(Orientation::Positive.to_global(LocalDir::Left), GlobalDir::Minus);
    }

    fn walker(dir_left: bool) -> ProgramState {
        // Perpetual walker: moves left until it catches someone.
        let p = algorithms::instantiate(&AlgorithmParams::EtPerpetualWithChirality);
        let _ = dir_left;
        p
    }

    #[test]
    fn unobstructed_move_goes_to_global_minus() {
        let mut c = new_configuration(ring(3), &[0], &[Orientation::Positive]).unwrap();
        let mut p = vec![walker(true)];
        let d = AdversaryDecision::new(None, vec![0]);
        step_round_in_place(&mut c, &mut p, &d, &ExecutionModel::fsync()).unwrap();
        assert_eq!(c.agents[0].node, 2);
        assert!(c.agents[0].moved);
        assert_eq!(c.visited, vec![true, false, true]);
    }

    #[test]
    fn blocked_agent_stays_on_port_and_sees_left() {
        let mut c = new_configuration(ring(3), &[0], &[Orientation::Positive]).unwrap();
        let mut p = vec![walker(true)];
        // Edge 2 joins nodes 2 and 0.
        let d = AdversaryDecision::new(Some(2), vec![0]);
        step_round_in_place(&mut c, &mut p, &d, &ExecutionModel::fsync()).unwrap();
        assert_eq!(c.agents[0].node, 0);
        assert_eq!(c.agents[0].slot, Slot::PortMinus);
        assert!(!c.agents[0].moved);
        let snap = take_snapshot(&c, 0);
        assert_eq!(snap.my_pos, Some(LocalDir::Left));
    }

    #[test]
    fn passive_transport_moves_sleeping_agent() {
        let mut c = new_configuration(ring(3), &[0], &[Orientation::Positive]).unwrap();
        let mut p = vec![walker(true)];
        let model = ExecutionModel::ssync(Transport::Pt, 4);
        let d = AdversaryDecision::new(Some(2), vec![0]);
        step_round_in_place(&mut c, &mut p, &d, &model).unwrap();
        assert_eq!(c.agents[0].slot, Slot::PortMinus);
        // Asleep next round, edge back: carried to node 2.
        let mut c2 = c.clone();
        let d = AdversaryDecision {
            missing: vec![],
            active: vec![],
            tie_break: vec![],
        };
        let out = step_round_in_place(&mut c2, &mut p, &d, &model).unwrap();
        assert_eq!(c2.agents[0].node, 2);
        assert_eq!(c2.agents[0].slot, Slot::Interior);
        assert!(c2.agents[0].moved);
        assert!(matches!(out.events[0], Event::PassiveTransport { .. }));
        // Under ET the same agent would not move.
        let model = ExecutionModel::ssync(Transport::Et, 4);
        let mut c3 = c.clone();
        step_round_in_place(&mut c3, &mut p, &d, &model).unwrap();
        assert_eq!(c3.agents[0].node, 0);
        assert_eq!(c3.agents[0].slot, Slot::PortMinus);
    }

    #[test]
    fn port_contention_follows_tie_break() {
        let two = [Orientation::Positive, Orientation::Positive];
        let c0 = new_configuration(ring(4), &[1, 1], &two).unwrap();
        let p0 = vec![walker(true), walker(true)];
        let model = ExecutionModel::fsync();
        let d = AdversaryDecision::new(Some(0), vec![0, 1]).with_tie_break(vec![1, 0]);
        let (c, _, out) = step_round(&c0, &p0, &d, &model).unwrap();
        assert_eq!(c.agents[1].slot, Slot::PortMinus);
        assert_eq!(c.agents[0].slot, Slot::Interior);
        assert!(out
            .events
            .contains(&Event::PortDenied { agent: 0, node: 1 }));
        assert!(check_port_exclusion(&c).is_ok());
    }

    #[test]
    fn crossing_agents_swap_silently() {
        let c0 = new_configuration(
            ring(4),
            &[0, 1],
            &[Orientation::Negative, Orientation::Positive],
        )
        .unwrap();
        let p0 = vec![walker(true), walker(true)];
        let d = AdversaryDecision::new(None, vec![0, 1]);
        let (c, _, out) = step_round(&c0, &p0, &d, &ExecutionModel::fsync()).unwrap();
        assert_eq!(c.agents[0].node, 1);
        assert_eq!(c.agents[1].node, 0);
        assert!(!out.events.iter().any(|e| matches!(
            e,
            Event::Meeting { .. } | Event::Catches { .. } | Event::Catched { .. }
        )));
        let (_, _, next) = step_round(&c, &[p0[0].clone(), p0[1].clone()], &d, &ExecutionModel::fsync()).unwrap();
        assert!(!next.events.iter().any(|e| matches!(e, Event::Meeting { .. })));
    }

    #[test]
    fn is_explored_examples() {
        let mut c = new_configuration(ring(3), &[0], &[Orientation::Positive]).unwrap();
        c.visited = vec![true, true, true];
        assert!(is_explored(&c));
        c.visited = vec![true, false, true];
        assert!(!is_explored(&c));
        let c = new_configuration(
            ring(5),
            &[0, 2],
            &[Orientation::Positive, Orientation::Positive],
        )
        .unwrap();
        assert!(!is_explored(&c));
    }

    #[test]
    fn validate_decision_cases() {
        let c = new_configuration(
            ring(4),
            &[0, 2],
            &[Orientation::Positive, Orientation::Positive],
        )
        .unwrap();
        let h = ActivationHistory::new(2);
        let fsync = ExecutionModel::fsync();
        assert!(validate_decision(&AdversaryDecision::new(Some(1), vec![0, 1]), &c, &fsync, &h).is_ok());
        assert_eq!(
            validate_decision(&AdversaryDecision::new(None, vec![]), &c, &fsync, &h),
            Err(DecisionViolation::EmptyActiveSet)
        );
        assert_eq!(
            validate_decision(&AdversaryDecision::new(None, vec![0]), &c, &fsync, &h),
            Err(DecisionViolation::NotFullySynchronous { agent: 1 })
        );
        let two_missing = AdversaryDecision {
            missing: vec![0, 1],
            active: vec![0, 1],
            tie_break: vec![],
        };
        assert_eq!(
            validate_decision(&two_missing, &c, &fsync, &h),
            Err(DecisionViolation::TooManyMissingEdges { count: 2 })
        );

        let ssync = ExecutionModel::ssync(Transport::Pt, 3);
        let mut h = ActivationHistory::new(2);
        let only0 = AdversaryDecision::new(None, vec![0]);
        let mut cfg = c.clone();
        for _ in 0..2 {
            assert!(validate_decision(&only0, &cfg, &ssync, &h).is_ok());
            cfg.round += 1;
            h.record(&only0, &cfg);
        }
        // Agent 1 would now be idle for the third consecutive round.
        assert!(matches!(
            validate_decision(&only0, &cfg, &ssync, &h),
            Err(DecisionViolation::FairnessWindow { agent: 1, .. })
        ));
    }
}
