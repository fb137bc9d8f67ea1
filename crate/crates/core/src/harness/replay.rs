//! Deterministic re-execution of recorded traces.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trace::{read_trace, RoundDigest, TraceRecord};
use super::{run_with, ExperimentConfig, HarnessError, RunOptions, RunResult};
use crate::adversary::RecordedDecisions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub rounds: usize,
    pub recorded_digest: String,
    pub recomputed_digest: String,
    /// First round whose recomputed record differs from the recorded one.
    pub first_divergence: Option<u64>,
    pub result: RunResult,
}

impl ReplayReport {
    pub fn matches(&self) -> bool {
        self.first_divergence.is_none() && self.recorded_digest == self.recomputed_digest
    }
}

pub fn replay(path: &Path) -> Result<ReplayReport, HarnessError> {
    let file = read_trace(path)?;
    replay_records(&file.header.config, &file.records, &file.header.digest)
}

/// Re-executes the recorded decisions from the initial configuration and
/// compares every round with the record.
pub fn replay_records(
    config: &ExperimentConfig,
    records: &[TraceRecord],
    recorded_digest: &str,
) -> Result<ReplayReport, HarnessError> {
    let mut config = config.clone();
    config.horizon = Some(records.len().max(1) as u64);
    let mut strategy = RecordedDecisions::new(records.iter().map(TraceRecord::decision).collect());
    let art = run_with(
        &config,
        &mut strategy,
        &RunOptions {
            trace: true,
            frames: false,
        },
    )?;
    let first_divergence = art
        .trace
        .iter()
        .zip(records)
        .position(|(a, b)| a != b)
        .or_else(|| (art.trace.len() != records.len()).then(|| art.trace.len().min(records.len())))
        .map(|i| records.get(i).map_or(i as u64, |r| r.round));
    Ok(ReplayReport {
        rounds: records.len(),
        recorded_digest: recorded_digest.to_string(),
        recomputed_digest: RoundDigest::of(&art.trace),
        first_divergence,
        result: art.result,
    })
}
