//! Adversary strategies: per round they pick the missing edge, the active
//! set and the port tie-break.
//!
//! Strategies are omniscient. [`intents`] dry-runs every running agent's
//! program on a copy so a strategy can react to what agents are about to do.
//! All randomness comes from a seeded ChaCha generator owned by the strategy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::protocol::{protocol_step, ProgramState};
use crate::ring::{
    step_round, take_snapshot, Action, ActivationHistory, AdversaryDecision, AgentIndex,
    Configuration, EdgeId, ExecutionModel, GlobalDir, NodeId, Synchrony,
};

pub use crate::ring::AdversaryDecision as Decision;

/// Everything a strategy may look at before deciding a round.
#[derive(Clone, Copy)]
pub struct WorldView<'a> {
    pub config: &'a Configuration,
    pub programs: &'a [ProgramState],
    pub model: &'a ExecutionModel,
    pub history: &'a ActivationHistory,
}

pub trait Strategy: Send {
    fn name(&self) -> &'static str;
    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision;
}

/// What an agent would do if activated this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    /// Already terminated.
    Idle,
    Stay,
    Terminate,
    Move(GlobalDir),
}

pub fn intents(view: &WorldView<'_>) -> Vec<Intent> {
    view.config
        .agents
        .iter()
        .map(|a| {
            if !a.is_running() {
                return Intent::Idle;
            }
            let mut p = view.programs[a.index].clone();
            let snap = take_snapshot(view.config, a.index);
            match protocol_step(&mut p, &snap).map(|o| o.action) {
                Ok(Action::Move(d)) => Intent::Move(a.orientation.to_global(d)),
                Ok(Action::Terminate) => Intent::Terminate,
                Ok(Action::Stay) | Err(_) => Intent::Stay,
            }
        })
        .collect()
}

/// Edge an agent would try to cross, if any.
pub fn intended_edge(config: &Configuration, agent: AgentIndex, intent: Intent) -> Option<EdgeId> {
    match intent {
        Intent::Move(g) => Some(config.topology.edge_toward(config.agents[agent].node, g)),
        _ => None,
    }
}

/// Running agents that must be activated now to respect the fairness window.
pub fn forced_by_fairness(view: &WorldView<'_>) -> Vec<bool> {
    let w = u64::from(view.model.fairness_window);
    view.config
        .agents
        .iter()
        .map(|a| a.is_running() && view.history.idle[a.index] + 1 >= w)
        .collect()
}

fn all_running(view: &WorldView<'_>) -> Vec<AgentIndex> {
    view.config.running_indices()
}

/// Config-level description of a strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversaryParams {
    None,
    FixedMissingEdge {
        edge: EdgeId,
    },
    Random {
        #[serde(default = "default_p_missing")]
        p_missing: f64,
    },
    BlockSingleAgent {
        #[serde(default)]
        target: AgentIndex,
    },
    PreventMeeting {
        /// Probability of removing a random harmless edge when no removal is needed.
        #[serde(default)]
        p_extra: f64,
    },
    NsAlternator,
    PtLowerBoundShifter {
        #[serde(default)]
        window: Option<usize>,
    },
    EtTwoRingConfuser {
        n_small: usize,
    },
    GreedyBlockFrontier,
    /// Explicit missing-edge sequence; nothing missing past its end.
    Schedule {
        missing: Vec<Option<EdgeId>>,
    },
}

fn default_p_missing() -> f64 {
    0.5
}

impl AdversaryParams {
    pub fn label(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::FixedMissingEdge { .. } => "fixed_missing_edge",
            Self::Random { .. } => "random",
            Self::BlockSingleAgent { .. } => "block_single_agent",
            Self::PreventMeeting { .. } => "prevent_meeting",
            Self::NsAlternator => "ns_alternator",
            Self::PtLowerBoundShifter { .. } => "pt_lower_bound_shifter",
            Self::EtTwoRingConfuser { .. } => "et_two_ring_confuser",
            Self::GreedyBlockFrontier => "greedy_block_frontier",
            Self::Schedule { .. } => "schedule",
        }
    }

    pub fn build(&self, seed: u64) -> Box<dyn Strategy> {
        match self {
            Self::None => Box::new(NoneAdversary),
            Self::FixedMissingEdge { edge } => Box::new(FixedMissingEdge { edge: *edge }),
            Self::Random { p_missing } => Box::new(RandomAdversary::new(seed, *p_missing)),
            Self::BlockSingleAgent { target } => Box::new(BlockSingleAgent { target: *target }),
            Self::PreventMeeting { p_extra } => Box::new(PreventMeeting::new(seed, *p_extra)),
            Self::NsAlternator => Box::new(NsAlternator::default()),
            Self::PtLowerBoundShifter { window } => Box::new(PtLowerBoundShifter::new(*window)),
            Self::EtTwoRingConfuser { n_small } => Box::new(EtTwoRingConfuser::new(*n_small)),
            Self::GreedyBlockFrontier => Box::new(GreedyBlockFrontier),
            Self::Schedule { missing } => Box::new(ScheduleAdversary::new(missing.clone())),
        }
    }
}

/// Never removes an edge; activates every running agent.
#[derive(Debug, Default)]
pub struct NoneAdversary;

impl Strategy for NoneAdversary {
    fn name(&self) -> &'static str {
        "none"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        AdversaryDecision::new(None, all_running(view))
    }
}

#[derive(Debug)]
pub struct FixedMissingEdge {
    pub edge: EdgeId,
}

impl Strategy for FixedMissingEdge {
    fn name(&self) -> &'static str {
        "fixed_missing_edge"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        AdversaryDecision::new(Some(self.edge), all_running(view))
    }
}

/// Removes a uniformly random edge with probability `p_missing`; under SSYNC
/// picks a random fair active set and a random tie-break.
#[derive(Debug)]
pub struct RandomAdversary {
    rng: ChaCha8Rng,
    p_missing: f64,
}

impl RandomAdversary {
    pub fn new(seed: u64, p_missing: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            p_missing: p_missing.clamp(0.0, 1.0),
        }
    }
}

impl Strategy for RandomAdversary {
    fn name(&self) -> &'static str {
        "random"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let n = view.config.n();
        let missing = self
            .rng
            .gen_bool(self.p_missing)
            .then(|| self.rng.gen_range(0..n));
        let running = all_running(view);
        let active = match view.model.synchrony {
            Synchrony::Fsync => running,
            Synchrony::Ssync => {
                let forced = forced_by_fairness(view);
                let mut active: Vec<AgentIndex> = running
                    .iter()
                    .copied()
                    .filter(|&a| forced[a] || self.rng.gen_bool(0.5))
                    .collect();
                if active.is_empty() {
                    active.push(*running.choose(&mut self.rng).expect("a running agent"));
                }
                active
            }
        };
        let mut order: Vec<AgentIndex> = (0..view.config.agents.len()).collect();
        order.shuffle(&mut self.rng);
        AdversaryDecision::new(missing, active).with_tie_break(order)
    }
}

/// Always removes the edge the target agent is about to cross.
#[derive(Debug, Default)]
pub struct BlockSingleAgent {
    pub target: AgentIndex,
}

impl Strategy for BlockSingleAgent {
    fn name(&self) -> &'static str {
        "block_single_agent"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let ints = intents(view);
        let missing = ints
            .get(self.target)
            .and_then(|&i| intended_edge(view.config, self.target, i));
        AdversaryDecision::new(missing, all_running(view))
    }
}

fn colocated_pairs(c: &Configuration) -> Vec<(AgentIndex, AgentIndex)> {
    let mut pairs = Vec::new();
    for (i, a) in c.agents.iter().enumerate() {
        for b in &c.agents[i + 1..] {
            if a.node == b.node {
                pairs.push((a.index, b.index));
            }
        }
    }
    pairs
}

/// One-round lookahead that never lets two separated agents end a round on
/// the same node. Some removal always works: two agents can only converge
/// over one edge, or one of them walks into the other.
#[derive(Debug)]
pub struct PreventMeeting {
    rng: ChaCha8Rng,
    p_extra: f64,
}

impl PreventMeeting {
    pub fn new(seed: u64, p_extra: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            p_extra: p_extra.clamp(0.0, 1.0),
        }
    }
}

impl Strategy for PreventMeeting {
    fn name(&self) -> &'static str {
        "prevent_meeting"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let active = all_running(view);
        let before = colocated_pairs(view.config);
        let creates_meeting = |missing: Option<EdgeId>| {
            let d = AdversaryDecision::new(missing, active.clone());
            match step_round(view.config, view.programs, &d, view.model) {
                Ok((after, _, _)) => colocated_pairs(&after).iter().any(|p| !before.contains(p)),
                Err(_) => false,
            }
        };
        let n = view.config.n();
        let safe: Vec<Option<EdgeId>> = std::iter::once(None)
            .chain((0..n).map(Some))
            .filter(|&m| !creates_meeting(m))
            .collect();
        let harmless_edges: Vec<Option<EdgeId>> =
            safe.iter().copied().filter(Option::is_some).collect();
        let missing = if safe.contains(&None)
            && (harmless_edges.is_empty() || !self.rng.gen_bool(self.p_extra))
        {
            None
        } else if !harmless_edges.is_empty() {
            *harmless_edges.choose(&mut self.rng).expect("nonempty")
        } else {
            None
        };
        AdversaryDecision::new(missing, active)
    }
}

/// NS-model confinement: each round one side of the agents' node is removed,
/// alternating; agents that want the other side are left asleep.
#[derive(Debug, Default)]
pub struct NsAlternator {
    parity: bool,
}

impl Strategy for NsAlternator {
    fn name(&self) -> &'static str {
        "ns_alternator"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let ints = intents(view);
        let running = all_running(view);
        let forced = forced_by_fairness(view);
        let pick = |side: GlobalDir| -> (Option<EdgeId>, Vec<AgentIndex>) {
            let mut missing = None;
            let active: Vec<AgentIndex> = running
                .iter()
                .copied()
                .filter(|&a| match ints[a] {
                    Intent::Move(g) if g != side => false,
                    Intent::Move(g) => {
                        missing = intended_edge(view.config, a, Intent::Move(g));
                        true
                    }
                    _ => true,
                })
                .collect();
            (missing, active)
        };
        let preferred = if self.parity { GlobalDir::Plus } else { GlobalDir::Minus };
        self.parity = !self.parity;
        let (mut missing, mut active) = pick(preferred);
        let starves_forced = running
            .iter()
            .any(|&a| forced[a] && !active.contains(&a));
        if active.is_empty() || starves_forced {
            (missing, active) = pick(preferred.opposite());
        }
        if active.is_empty() {
            active = running;
        }
        AdversaryDecision::new(missing, active)
    }
}

/// Keeps two agents inside a window of consecutive nodes: a single agent
/// pressing against the window boundary is blocked; when both press against
/// opposite boundaries the one pressing longer is let through (passively,
/// if it sleeps on its port) and the window shifts one node its way.
#[derive(Debug)]
pub struct PtLowerBoundShifter {
    window: Option<usize>,
    lo: Option<NodeId>,
    press_since: Vec<Option<u64>>,
    pub shifts: u64,
}

impl PtLowerBoundShifter {
    pub fn new(window: Option<usize>) -> Self {
        Self {
            window,
            lo: None,
            press_since: Vec::new(),
            shifts: 0,
        }
    }
}

impl Strategy for PtLowerBoundShifter {
    fn name(&self) -> &'static str {
        "pt_lower_bound_shifter"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let cfg = view.config;
        let topo = cfg.topology;
        let n = cfg.n();
        let w = self.window.unwrap_or(n.div_ceil(2)).clamp(1, n);
        let inside = |lo: NodeId, v: NodeId| (v + n - lo) % n < w;
        let lo = *self.lo.get_or_insert_with(|| {
            (0..n)
                .find(|&l| cfg.agents.iter().all(|a| inside(l, a.node)))
                .unwrap_or(cfg.agents[0].node)
        });
        self.press_since.resize(cfg.agents.len(), None);
        let ints = intents(view);
        let running = all_running(view);

        if running.len() < cfg.agents.len() {
            let missing = running
                .first()
                .and_then(|&a| intended_edge(cfg, a, ints[a]));
            return AdversaryDecision::new(missing, running);
        }

        let mut pressing: Vec<(AgentIndex, GlobalDir, EdgeId)> = Vec::new();
        for &a in &running {
            if let Intent::Move(g) = ints[a] {
                let node = cfg.agents[a].node;
                if !inside(lo, topo.neighbor(node, g)) {
                    pressing.push((a, g, topo.edge_toward(node, g)));
                }
            }
        }
        for a in 0..cfg.agents.len() {
            if pressing.iter().any(|p| p.0 == a) {
                self.press_since[a].get_or_insert(cfg.round);
            } else {
                self.press_since[a] = None;
            }
        }

        let first_edge = pressing.first().map(|p| p.2);
        if pressing.iter().all(|p| Some(p.2) == first_edge) {
            return AdversaryDecision::new(first_edge, running);
        }
        let &(waiter, wdir, wedge) = pressing
            .iter()
            .min_by_key(|p| (self.press_since[p.0], p.0))
            .expect("at least two pressing agents");
        let blocked = pressing
            .iter()
            .find(|p| p.2 != wedge)
            .map(|p| p.2)
            .expect("a second edge");
        let waiter_on_port = cfg.port_edge(&cfg.agents[waiter]) == Some(wedge);
        let mut active: Vec<AgentIndex> = running
            .iter()
            .copied()
            .filter(|&a| !(a == waiter && waiter_on_port && view.model.passive_transport()))
            .collect();
        if active.is_empty() {
            active = running;
        }
        self.lo = Some(topo.neighbor(lo, wdir));
        self.shifts += 1;
        self.press_since[waiter] = None;
        AdversaryDecision::new(Some(blocked), active)
    }
}

/// Drives a ring of size `n_small` and a larger ring identically, as long as
/// all agents start on nodes `0..n_small`. Edge `n - 1` plays the role of
/// the small ring's closing edge and edge `n_small - 1` that of the large
/// ring's second boundary; neither is ever crossed.
#[derive(Debug)]
pub struct EtTwoRingConfuser {
    n_small: usize,
    busy: u64,
}

impl EtTwoRingConfuser {
    pub fn new(n_small: usize) -> Self {
        Self { n_small, busy: 0 }
    }
}

impl Strategy for EtTwoRingConfuser {
    fn name(&self) -> &'static str {
        "et_two_ring_confuser"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let cfg = view.config;
        let n = cfg.n();
        let small = n == self.n_small;
        let e0 = n - 1;
        let en = self.n_small - 1;
        let ints = intents(view);
        let running = all_running(view);
        let mut at_e0 = Vec::new();
        let mut at_en = Vec::new();
        for &a in &running {
            let node = cfg.agents[a].node;
            match ints[a] {
                Intent::Move(GlobalDir::Minus) if node == 0 => at_e0.push(a),
                Intent::Move(GlobalDir::Plus) if node == self.n_small - 1 => at_en.push(a),
                _ => {}
            }
        }
        let (missing, passive): (Option<EdgeId>, &[AgentIndex]) =
            match (at_e0.is_empty(), at_en.is_empty()) {
                (true, true) => (None, &[]),
                (false, true) => (Some(e0), &[]),
                (true, false) => (Some(en), &[]),
                (false, false) => {
                    self.busy += 1;
                    if self.busy % 2 == 1 {
                        (Some(en), &at_e0)
                    } else {
                        (Some(e0), &at_en)
                    }
                }
            };
        let missing = if small { Some(e0) } else { missing };
        let active: Vec<AgentIndex> = running
            .iter()
            .copied()
            .filter(|a| !passive.contains(a))
            .collect();
        AdversaryDecision::new(missing, active)
    }
}

/// Blocks the edge ahead of the agent with the longest current sweep.
#[derive(Debug, Default)]
pub struct GreedyBlockFrontier;

impl Strategy for GreedyBlockFrontier {
    fn name(&self) -> &'static str {
        "greedy_block_frontier"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let ints = intents(view);
        let missing = view
            .config
            .running()
            .filter_map(|a| {
                intended_edge(view.config, a.index, ints[a.index])
                    .map(|e| (view.programs[a.index].counters.esteps, a.index, e))
            })
            .max_by_key(|&(esteps, index, _)| (esteps, std::cmp::Reverse(index)))
            .map(|(_, _, e)| e);
        AdversaryDecision::new(missing, all_running(view))
    }
}

/// Plays back a fixed missing-edge sequence with every running agent active.
#[derive(Debug)]
pub struct ScheduleAdversary {
    missing: Vec<Option<EdgeId>>,
    next: usize,
}

impl ScheduleAdversary {
    pub fn new(missing: Vec<Option<EdgeId>>) -> Self {
        Self { missing, next: 0 }
    }
}

impl Strategy for ScheduleAdversary {
    fn name(&self) -> &'static str {
        "schedule"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        let m = self.missing.get(self.next).copied().flatten();
        self.next += 1;
        AdversaryDecision::new(m, all_running(view))
    }
}

/// Replays recorded decisions verbatim, then falls back to no adversary.
#[derive(Debug)]
pub struct RecordedDecisions {
    decisions: std::vec::IntoIter<AdversaryDecision>,
}

impl RecordedDecisions {
    pub fn new(decisions: Vec<AdversaryDecision>) -> Self {
        Self {
            decisions: decisions.into_iter(),
        }
    }
}

impl Strategy for RecordedDecisions {
    fn name(&self) -> &'static str {
        "recorded"
    }

    fn decide(&mut self, view: &WorldView<'_>) -> AdversaryDecision {
        self.decisions
            .next()
            .unwrap_or_else(|| AdversaryDecision::new(None, all_running(view)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{instantiate, AlgorithmParams};
    use crate::ring::{new_configuration, Orientation, RingTopology};

    fn setup(
        n: usize,
        starts: &[NodeId],
        params: &AlgorithmParams,
    ) -> (Configuration, Vec<ProgramState>) {
        let o = vec![Orientation::Positive; starts.len()];
        let c = new_configuration(RingTopology::new(n, None).unwrap(), starts, &o).unwrap();
        let p = starts.iter().map(|_| instantiate(params)).collect();
        (c, p)
    }

    #[test]
    fn random_adversary_is_deterministic() {
        let (c, p) = setup(6, &[0, 3], &AlgorithmParams::PerpetualExploration);
        let model = ExecutionModel::ssync(crate::ring::Transport::Pt, 4);
        let h = ActivationHistory::new(2);
        let view = WorldView {
            config: &c,
            programs: &p,
            model: &model,
            history: &h,
        };
        let mut a = RandomAdversary::new(9, 0.5);
        let mut b = RandomAdversary::new(9, 0.5);
        for _ in 0..20 {
            assert_eq!(a.decide(&view), b.decide(&view));
        }
    }

    #[test]
    fn block_single_agent_targets_intended_edge() {
        let (c, p) = setup(5, &[2], &AlgorithmParams::PerpetualExploration);
        let model = ExecutionModel::fsync();
        let h = ActivationHistory::new(1);
        let view = WorldView {
            config: &c,
            programs: &p,
            model: &model,
            history: &h,
        };
        // Left is global minus: edge 1 joins nodes 1 and 2.
        assert_eq!(BlockSingleAgent::default().decide(&view).missing, vec![1]);
    }

    #[test]
    fn greedy_prefers_lowest_index_on_ties() {
        let (c, p) = setup(6, &[0, 3], &AlgorithmParams::PerpetualExploration);
        let model = ExecutionModel::fsync();
        let h = ActivationHistory::new(2);
        let view = WorldView {
            config: &c,
            programs: &p,
            model: &model,
            history: &h,
        };
        assert_eq!(GreedyBlockFrontier.decide(&view).missing, vec![5]);
    }

    #[test]
    fn params_parse() {
        let a: AdversaryParams = serde_json::from_str(r#"{"name":"random","p_missing":0.3}"#).unwrap();
        assert_eq!(a, AdversaryParams::Random { p_missing: 0.3 });
        let a: AdversaryParams = serde_json::from_str(r#"{"name":"none"}"#).unwrap();
        assert_eq!(a.label(), "none");
    }
}
