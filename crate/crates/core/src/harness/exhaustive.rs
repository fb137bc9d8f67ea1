//! Exhaustive verification over every FSYNC missing-edge schedule.
//!
//! Schedules are explored breadth-first, one round per level. Schedule
//! prefixes leading to the same full state (configuration, programs and run
//! bookkeeping) are merged and carry a multiplicity, so the work is bounded
//! by the number of distinct states rather than by `(n + 1)^H`. Once every
//! agent has terminated a state is absorbing and stands for all of its
//! `(n + 1)^(H - k)` continuations.
//!
//! Rounds `0..H` are enumerated; one further round with every edge present
//! observes terminations decided on the state reached after round `H - 1`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::run::{check_transition, initial_state};
use super::{ExperimentConfig, HarnessError};
use crate::protocol::ProgramState;
use crate::ring::{
    is_explored, step_round_in_place, AdversaryDecision, Configuration, EdgeId, Event, Synchrony,
};

/// `(n + 1)^horizon`, saturating.
pub fn schedule_count(n: usize, horizon: u64) -> u128 {
    let base = n as u128 + 1;
    (0..horizon).fold(1u128, |acc, _| acc.saturating_mul(base))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub n: usize,
    pub horizon: u64,
    pub schedules: u128,
    /// Schedules after which every agent had terminated.
    pub terminated: u128,
    pub unterminated: u128,
    /// Schedules with a termination before exploration completed.
    pub unsound: u128,
    /// Schedules that ended with an unvisited node.
    pub unexplored: u128,
    pub invariant_failures: u128,
    pub max_termination_round: Option<u64>,
    pub max_explored_round: Option<u64>,
    pub peak_states: usize,
    pub expanded_states: u64,
    /// A schedule attaining `max_termination_round`.
    pub worst_schedule: Option<Vec<Option<EdgeId>>>,
    /// A schedule exhibiting an unsound termination or broken invariant.
    pub counterexample: Option<Vec<Option<EdgeId>>>,
}

impl ExhaustiveReport {
    pub fn sound(&self) -> bool {
        self.unsound == 0 && self.invariant_failures == 0
    }

    pub fn all_terminated(&self) -> bool {
        self.unterminated == 0
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    cfg: Configuration,
    programs: Vec<ProgramState>,
    explored: Option<u64>,
    terms: Vec<Option<u64>>,
    unsound: bool,
    broken: bool,
}

struct Entry {
    mult: u128,
    schedule: Vec<Option<EdgeId>>,
}

fn advance(node: &Node, missing: Option<EdgeId>) -> Result<Node, HarnessError> {
    let mut next = node.clone();
    let round = next.cfg.round;
    let decision = AdversaryDecision::new(missing, next.cfg.running_indices());
    let model = crate::ring::ExecutionModel::fsync();
    let out = step_round_in_place(&mut next.cfg, &mut next.programs, &decision, &model)?;
    if !check_transition(&node.cfg, &next.cfg).is_empty() {
        next.broken = true;
    }
    for e in &out.events {
        if let Event::Terminated { agent, .. } = *e {
            next.terms[agent] = Some(round);
            if !next.explored.is_some_and(|x| x <= round) {
                next.unsound = true;
            }
        }
    }
    if next.explored.is_none() && is_explored(&next.cfg) {
        next.explored = Some(next.cfg.round);
    }
    next.cfg.missing_edge = None;
    Ok(next)
}

#[derive(Default)]
struct Tally {
    report: Option<ExhaustiveReport>,
}

impl Tally {
    fn fold(&mut self, node: &Node, mult: u128, schedule: &[Option<EdgeId>]) {
        let r = self.report.as_mut().expect("initialised");
        if node.terms.iter().all(Option::is_some) {
            r.terminated = r.terminated.saturating_add(mult);
            let last = node.terms.iter().flatten().copied().max();
            if last > r.max_termination_round {
                r.max_termination_round = last;
                r.worst_schedule = Some(schedule.to_vec());
            }
        } else {
            r.unterminated = r.unterminated.saturating_add(mult);
        }
        match node.explored {
            Some(e) => r.max_explored_round = r.max_explored_round.max(Some(e)),
            None => r.unexplored = r.unexplored.saturating_add(mult),
        }
        if node.unsound {
            r.unsound = r.unsound.saturating_add(mult);
        }
        if node.broken {
            r.invariant_failures = r.invariant_failures.saturating_add(mult);
        }
        if (node.unsound || node.broken) && r.counterexample.is_none() {
            r.counterexample = Some(schedule.to_vec());
        }
    }
}

/// Verifies a config (its adversary is ignored) against every schedule of
/// `horizon` rounds, provided `(n + 1)^horizon <= budget`.
pub fn exhaustive_verify(
    config: &ExperimentConfig,
    horizon: u64,
    budget: u128,
) -> Result<ExhaustiveReport, HarnessError> {
    if config.model.synchrony != Synchrony::Fsync {
        return Err(HarnessError::NotSynchronous);
    }
    let n = config.topology.n;
    let schedules = schedule_count(n, horizon);
    if schedules > budget {
        return Err(HarnessError::BudgetExceeded { schedules, budget });
    }
    let (cfg, programs) = initial_state(config)?;
    let m = cfg.agents.len();
    let root = Node {
        explored: is_explored(&cfg).then_some(0),
        cfg,
        programs,
        terms: vec![None; m],
        unsound: false,
        broken: false,
    };
    let mut tally = Tally {
        report: Some(ExhaustiveReport {
            n,
            horizon,
            schedules,
            terminated: 0,
            unterminated: 0,
            unsound: 0,
            unexplored: 0,
            invariant_failures: 0,
            max_termination_round: None,
            max_explored_round: None,
            peak_states: 1,
            expanded_states: 0,
            worst_schedule: None,
            counterexample: None,
        }),
    };
    let mut level: HashMap<Node, Entry> = HashMap::new();
    level.insert(
        root,
        Entry {
            mult: 1,
            schedule: Vec::new(),
        },
    );
    let mut expanded = 0u64;
    let mut peak = 1usize;
    for k in 0..horizon {
        let mut next: HashMap<Node, Entry> = HashMap::with_capacity(level.len() * 2);
        let remaining = schedule_count(n, horizon - k);
        for (node, entry) in level {
            if node.cfg.all_terminated() {
                tally.fold(&node, entry.mult.saturating_mul(remaining), &entry.schedule);
                continue;
            }
            expanded += 1;
            for choice in std::iter::once(None).chain((0..n).map(Some)) {
                let child = advance(&node, choice)?;
                next.entry(child)
                    .and_modify(|e| e.mult = e.mult.saturating_add(entry.mult))
                    .or_insert_with(|| {
                        let mut schedule = entry.schedule.clone();
                        schedule.push(choice);
                        Entry {
                            mult: entry.mult,
                            schedule,
                        }
                    });
            }
        }
        peak = peak.max(next.len());
        level = next;
    }
    for (node, entry) in level {
        let last = if node.cfg.all_terminated() {
            node
        } else {
            advance(&node, None)?
        };
        tally.fold(&last, entry.mult, &entry.schedule);
    }
    let mut report = tally.report.take().expect("initialised");
    report.peak_states = peak;
    report.expanded_states = expanded;
    Ok(report)
}
