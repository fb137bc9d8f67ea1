//! Randomized campaigns: many seeded runs of one config template.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_with, ExperimentConfig, HarnessError, RunOptions, RunResult};
use crate::ring::Orientation;

/// How start nodes are chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartPolicy {
    /// Use the template's starts.
    Fixed,
    /// Uniform random nodes, optionally pairwise distinct.
    Random { distinct: bool },
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub template: ExperimentConfig,
    pub trials: usize,
    /// Trial `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub starts: StartPolicy,
    /// Draw orientations per trial (a common one if the algorithm assumes
    /// chirality).
    pub random_orientations: bool,
}

impl CampaignSpec {
    pub fn new(template: ExperimentConfig, trials: usize) -> Self {
        let base_seed = template.seed;
        Self {
            template,
            trials,
            base_seed,
            starts: StartPolicy::Fixed,
            random_orientations: false,
        }
    }

    pub fn random_starts(mut self, distinct: bool) -> Self {
        self.starts = StartPolicy::Random { distinct };
        self
    }

    pub fn random_orientations(mut self) -> Self {
        self.random_orientations = true;
        self
    }

    /// The concrete config of one trial.
    pub fn trial(&self, i: usize) -> ExperimentConfig {
        let mut c = self.template.clone();
        let seed = self.base_seed.wrapping_add(i as u64);
        c.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157_4a7e_0c0f_fee5);
        let n = c.topology.n;
        let m = c.agents.starts.len();
        let req = c.algorithm.requirements();
        if let StartPolicy::Random { distinct } = self.starts {
            c.agents.starts = if req.starts_at_landmark {
                vec![c.topology.landmark.unwrap_or(0); m]
            } else if distinct && m <= n {
                let mut nodes: Vec<usize> = (0..n).collect();
                nodes.shuffle(&mut rng);
                nodes.truncate(m);
                nodes
            } else {
                (0..m).map(|_| rng.gen_range(0..n)).collect()
            };
        }
        if self.random_orientations {
            let draw = |rng: &mut ChaCha8Rng| {
                if rng.gen_bool(0.5) {
                    Orientation::Positive
                } else {
                    Orientation::Negative
                }
            };
            c.agents.orientations = if req.chirality && !c.negative {
                vec![draw(&mut rng); m]
            } else {
                (0..m).map(|_| draw(&mut rng)).collect()
            };
        }
        c
    }
}

/// One CSV row; column names are part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub run_id: usize,
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub bound: Option<u64>,
    pub algorithm: String,
    pub adversary: String,
    pub explored_round: Option<u64>,
    pub first_termination_round: Option<u64>,
    pub total_moves: u64,
    pub violation: String,
}

#[derive(Debug, Clone)]
pub struct CampaignSummary {
    pub rows: Vec<CampaignRow>,
    pub results: Vec<RunResult>,
}

impl CampaignSummary {
    pub fn violating_runs(&self) -> usize {
        self.results.iter().filter(|r| !r.violations.is_empty()).count()
    }

    pub fn max_total_moves(&self) -> u64 {
        self.results.iter().map(|r| r.total_moves).max().unwrap_or(0)
    }

    pub fn mean_total_moves(&self) -> f64 {
        if self.results.is_empty() {
            return 0.0;
        }
        self.results.iter().map(|r| r.total_moves as f64).sum::<f64>() / self.results.len() as f64
    }
}

pub fn campaign(spec: &CampaignSpec) -> Result<CampaignSummary, HarnessError> {
    spec.template.validate()?;
    let outcomes: Vec<Result<(CampaignRow, RunResult), HarnessError>> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let cfg = spec.trial(i);
            let mut strategy = cfg.adversary.build(cfg.seed);
            let result = run_with(&cfg, strategy.as_mut(), &RunOptions::default())?.result;
            let bound = cfg.algorithm.bound();
            let row = CampaignRow {
                run_id: i,
                seed: cfg.seed,
                n: cfg.topology.n,
                bound: (bound > 0).then_some(bound),
                algorithm: cfg.algorithm.name().to_string(),
                adversary: cfg.adversary.label().to_string(),
                explored_round: result.explored_round,
                first_termination_round: result.first_termination_round,
                total_moves: result.total_moves,
                violation: result
                    .violations
                    .first()
                    .map(|v| v.label().to_string())
                    .unwrap_or_default(),
            };
            Ok((row, result))
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.trials);
    let mut results = Vec::with_capacity(spec.trials);
    for o in outcomes {
        let (row, result) = o?;
        rows.push(row);
        results.push(result);
    }
    Ok(CampaignSummary { rows, results })
}

pub fn write_csv(rows: &[CampaignRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
