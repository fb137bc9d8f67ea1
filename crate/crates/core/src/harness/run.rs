//! The single-run driver and its per-round checks.

use serde::{Deserialize, Serialize};

use super::trace::{RoundDigest, TraceRecord};
use super::{ExperimentConfig, HarnessError, Violation};
use crate::adversary::{Strategy, WorldView};
use crate::algorithms::instantiate;
use crate::protocol::ProgramState;
use crate::ring::{
    check_port_exclusion, is_explored, new_configuration, step_round_in_place, validate_decision,
    ActivationHistory, AgentIndex, Configuration, DecisionViolation, Event, Snapshot, Synchrony,
    Transport,
};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep every [`TraceRecord`].
    pub trace: bool,
    /// Keep every active agent's snapshot.
    pub frames: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub moves: u64,
    pub transports: u64,
    pub blocked: u64,
    pub denied: u64,
    pub meetings: u64,
    pub catches: u64,
    pub catched: u64,
}

impl EventCounts {
    /// Meetings, catches and catched combined.
    pub fn encounters(&self) -> u64 {
        self.meetings + self.catches + self.catched
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub rounds: u64,
    /// Number of completed rounds after which every node had been visited.
    pub explored_round: Option<u64>,
    /// Round in which each agent terminated.
    pub terminations: Vec<Option<u64>>,
    pub first_termination_round: Option<u64>,
    pub total_moves: u64,
    pub moves_per_agent: Vec<u64>,
    pub visited: Vec<bool>,
    pub events: EventCounts,
    /// Longest stretch of consecutive inactive rounds of any running agent.
    pub max_idle: u64,
    pub violations: Vec<Violation>,
    pub trace_digest: String,
}

impl RunResult {
    pub fn explored(&self) -> bool {
        self.explored_round.is_some()
    }

    pub fn any_terminated(&self) -> bool {
        self.first_termination_round.is_some()
    }

    pub fn all_terminated(&self) -> bool {
        self.terminations.iter().all(Option::is_some)
    }

    pub fn last_termination_round(&self) -> Option<u64> {
        if self.all_terminated() {
            self.terminations.iter().flatten().copied().max()
        } else {
            None
        }
    }

    /// Every termination happened after exploration completed.
    pub fn sound(&self) -> bool {
        self.terminations
            .iter()
            .flatten()
            .all(|&t| self.explored_round.is_some_and(|e| e <= t))
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }
}

/// What the active agents saw in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub round: u64,
    pub active: Vec<AgentIndex>,
    pub observations: Vec<(AgentIndex, Snapshot)>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub result: RunResult,
    pub trace: Vec<TraceRecord>,
    pub frames: Vec<Frame>,
    pub final_config: Configuration,
    pub final_programs: Vec<ProgramState>,
}

/// First round in which the two runs activated different agents or showed
/// some agent a different snapshot; `None` if they agree on their common
/// prefix. Needs runs recorded with `frames`.
pub fn first_observation_divergence(a: &RunArtifacts, b: &RunArtifacts) -> Option<u64> {
    a.frames
        .iter()
        .zip(&b.frames)
        .find(|(x, y)| x != y)
        .map(|(x, _)| x.round)
}

/// Runs a validated config with the adversary it names.
pub fn run(config: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    config.validate()?;
    let mut strategy = config.adversary.build(config.seed);
    Ok(run_with(config, strategy.as_mut(), &RunOptions::default())?.result)
}

pub(crate) fn initial_state(
    config: &ExperimentConfig,
) -> Result<(Configuration, Vec<ProgramState>), HarnessError> {
    let c = new_configuration(
        config.topology()?,
        &config.agents.starts,
        &config.agents.orientations,
    )?;
    let programs = c.agents.iter().map(|_| instantiate(&config.algorithm)).collect();
    Ok((c, programs))
}

/// Invariants that must hold between two consecutive configurations.
pub(crate) fn check_transition(before: &Configuration, after: &Configuration) -> Vec<Violation> {
    let round = before.round;
    let mut out = Vec::new();
    if let Err((node, slot)) = check_port_exclusion(after) {
        out.push(Violation::PortExclusion { round, node, slot });
    }
    let conserved = after.agents.len() == before.agents.len()
        && after.agents.iter().all(|a| a.node < after.n())
        && before
            .agents
            .iter()
            .zip(&after.agents)
            .all(|(b, a)| b.is_running() || (a.node == b.node && a.slot == b.slot && !a.is_running()));
    if !conserved {
        out.push(Violation::AgentConservation { round });
    }
    let monotone = before
        .visited
        .iter()
        .zip(&after.visited)
        .all(|(&b, &a)| !b || a);
    let witnessed = after.agents.iter().all(|a| after.visited[a.node]);
    if !monotone || !witnessed {
        out.push(Violation::VisitedShrank { round });
    }
    out
}

/// Runs a config against an explicit strategy.
pub fn run_with(
    config: &ExperimentConfig,
    strategy: &mut dyn Strategy,
    opts: &RunOptions,
) -> Result<RunArtifacts, HarnessError> {
    let (mut cfg, mut programs) = initial_state(config)?;
    let model = config.model;
    let horizon = config.horizon();
    let m = cfg.agents.len();
    let mut history = ActivationHistory::new(m);
    let mut digest = RoundDigest::new();
    let mut trace = Vec::new();
    let mut frames = Vec::new();
    let mut violations = Vec::new();
    let mut events = EventCounts::default();
    let mut moves = vec![0u64; m];
    let mut terminations = vec![None; m];
    let mut explored_round = is_explored(&cfg).then_some(0);
    let mut max_idle = 0;
    let window = u64::from(model.fairness_window);
    let track_et = model.synchrony == Synchrony::Ssync && model.transport == Transport::Et;

    while cfg.round < horizon && !cfg.all_terminated() {
        if config.stop_when_explored && explored_round.is_some() {
            break;
        }
        let round = cfg.round;
        let decision = {
            let view = WorldView {
                config: &cfg,
                programs: &programs,
                model: &model,
                history: &history,
            };
            strategy.decide(&view)
        };
        if let Err(v) = validate_decision(&decision, &cfg, &model, &history) {
            let fatal = !matches!(v, DecisionViolation::FairnessWindow { .. });
            violations.push(Violation::Decision { round, violation: v });
            if fatal {
                break;
            }
        }
        let before = cfg.clone();
        let outcome = match step_round_in_place(&mut cfg, &mut programs, &decision, &model) {
            Ok(o) => o,
            Err(e) => {
                violations.push(Violation::Protocol {
                    round,
                    message: e.to_string(),
                });
                break;
            }
        };
        history.record(&decision, &cfg);
        violations.extend(check_transition(&before, &cfg));

        for e in &outcome.events {
            match *e {
                Event::Moved { agent, .. } => {
                    events.moves += 1;
                    moves[agent] += 1;
                }
                Event::PassiveTransport { agent, .. } => {
                    events.transports += 1;
                    moves[agent] += 1;
                }
                Event::Blocked { .. } => events.blocked += 1,
                Event::PortDenied { .. } => events.denied += 1,
                Event::Meeting { .. } => events.meetings += 1,
                Event::Catches { .. } => events.catches += 1,
                Event::Catched { .. } => events.catched += 1,
                Event::Terminated { agent, .. } => {
                    terminations[agent] = Some(round);
                    let sound = explored_round.is_some_and(|e| e <= round);
                    if !sound && !config.negative {
                        violations.push(Violation::UnsoundTermination { round, agent });
                    }
                }
            }
        }
        if explored_round.is_none() && is_explored(&cfg) {
            explored_round = Some(cfg.round);
        }
        for (i, (a, p)) in cfg.agents.iter().zip(&programs).enumerate() {
            let tsteps = p.counters.tsteps + u64::from(a.unobserved_move);
            if tsteps != moves[i] {
                violations.push(Violation::MoveAccounting {
                    round,
                    agent: i,
                    tsteps,
                    moves: moves[i],
                });
            }
            if a.is_running() {
                max_idle = max_idle.max(history.idle[i]);
            }
            if track_et {
                if let Some(since) = history.et_debt[i] {
                    if cfg.round - since == window + 1 {
                        violations.push(Violation::EventualTransport { round, agent: i, since });
                    }
                }
            }
        }

        let record = TraceRecord::capture(round, &decision, &cfg, &programs, outcome.events);
        digest.absorb(&record);
        if opts.trace {
            trace.push(record);
        }
        if opts.frames {
            frames.push(Frame {
                round,
                active: decision.active.clone(),
                observations: outcome.observations,
            });
        }
    }

    let total_moves = moves.iter().sum();
    let result = RunResult {
        rounds: cfg.round,
        explored_round,
        first_termination_round: terminations.iter().flatten().copied().min(),
        terminations,
        total_moves,
        moves_per_agent: moves,
        visited: cfg.visited.clone(),
        events,
        max_idle,
        violations,
        trace_digest: digest.finish(),
    };
    Ok(RunArtifacts {
        result,
        trace,
        frames,
        final_config: cfg,
        final_programs: programs,
    })
}
