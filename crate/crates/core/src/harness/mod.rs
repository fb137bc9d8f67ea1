//! Running experiments: single runs, exhaustive schedule verification,
//! randomized campaigns and trace replay.

mod campaign;
mod config;
mod exhaustive;
mod replay;
mod run;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::ProtocolError;
use crate::ring::{AgentIndex, DecisionViolation, ModelError, NodeId, Slot};

pub use campaign::{campaign, write_csv, CampaignRow, CampaignSpec, CampaignSummary, StartPolicy};
pub use config::{AgentsConfig, ExperimentConfig, FieldError, TopologyConfig};
pub use exhaustive::{exhaustive_verify, schedule_count, ExhaustiveReport};
pub use replay::{replay, replay_records, ReplayReport};
pub use run::{first_observation_divergence, run, run_with, EventCounts, RunArtifacts, RunOptions, RunResult};
pub use trace::{
    read_trace, write_trace, AgentRecord, RoundDigest, TraceFile, TraceHeader, TraceRecord,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<FieldError>),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{schedules} schedules exceed the budget of {budget}")]
    BudgetExceeded { schedules: u128, budget: u128 },
    #[error("exhaustive verification requires a fully synchronous model")]
    NotSynchronous,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A property that failed during a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Decision { round: u64, violation: DecisionViolation },
    UnsoundTermination { round: u64, agent: AgentIndex },
    PortExclusion { round: u64, node: NodeId, slot: Slot },
    AgentConservation { round: u64 },
    VisitedShrank { round: u64 },
    MoveAccounting { round: u64, agent: AgentIndex, tsteps: u64, moves: u64 },
    EventualTransport { round: u64, agent: AgentIndex, since: u64 },
    Protocol { round: u64, message: String },
}

impl Violation {
    pub fn round(&self) -> u64 {
        match *self {
            Violation::Decision { round, .. }
            | Violation::UnsoundTermination { round, .. }
            | Violation::PortExclusion { round, .. }
            | Violation::AgentConservation { round }
            | Violation::VisitedShrank { round }
            | Violation::MoveAccounting { round, .. }
            | Violation::EventualTransport { round, .. }
            | Violation::Protocol { round, .. } => round,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Violation::Decision { .. } => "decision",
            Violation::UnsoundTermination { .. } => "unsound_termination",
            Violation::PortExclusion { .. } => "port_exclusion",
            Violation::AgentConservation { .. } => "agent_conservation",
            Violation::VisitedShrank { .. } => "visited_shrank",
            Violation::MoveAccounting { .. } => "move_accounting",
            Violation::EventualTransport { .. } => "eventual_transport",
            Violation::Protocol { .. } => "protocol",
        }
    }
}
