//! Experiment configuration and its validation.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::adversary::AdversaryParams;
use crate::algorithms::AlgorithmParams;
use crate::ring::{ExecutionModel, NodeId, Orientation, RingTopology, Synchrony};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub n: usize,
    #[serde(default)]
    pub landmark: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    pub starts: Vec<NodeId>,
    pub orientations: Vec<Orientation>,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologyConfig,
    pub model: ExecutionModel,
    pub algorithm: AlgorithmParams,
    pub agents: AgentsConfig,
    pub adversary: AdversaryParams,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the algorithm's own bound.
    #[serde(default)]
    pub horizon: Option<u64>,
    #[serde(default)]
    pub stop_when_explored: bool,
    /// Allows mismatched assumptions and does not treat premature
    /// termination as a violation.
    #[serde(default)]
    pub negative: bool,
}

/// One rejected configuration field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    /// A valid config for `algorithm` on `n` nodes: its own execution model
    /// (fairness window 8 under SSYNC), landmark 0 when needed, agents spread
    /// evenly (or on the landmark) with positive orientation, no adversary.
    pub fn for_algorithm(algorithm: AlgorithmParams, n: usize) -> Self {
        let req = algorithm.requirements();
        let model = match req.synchrony {
            Synchrony::Fsync => ExecutionModel::fsync(),
            Synchrony::Ssync => ExecutionModel::ssync(req.transports[0], 8),
        };
        let m = req.agents;
        let starts = if req.starts_at_landmark {
            vec![0; m]
        } else {
            (0..m).map(|i| i * n / m).collect()
        };
        Self {
            topology: TopologyConfig {
                n,
                landmark: req.landmark.then_some(0),
            },
            model,
            algorithm,
            agents: AgentsConfig {
                starts,
                orientations: vec![Orientation::Positive; m],
            },
            adversary: AdversaryParams::None,
            seed: 0,
            horizon: None,
            stop_when_explored: false,
            negative: false,
        }
    }

    pub fn with_adversary(mut self, adversary: AdversaryParams) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn with_model(mut self, model: ExecutionModel) -> Self {
        self.model = model;
        self
    }

    /// Replaces the agents; `orientations` must match `starts` in length.
    pub fn with_agents(mut self, starts: Vec<NodeId>, orientations: Vec<Orientation>) -> Self {
        self.agents = AgentsConfig { starts, orientations };
        self
    }

    pub fn with_landmark(mut self, landmark: Option<NodeId>) -> Self {
        self.topology.landmark = landmark;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    /// Marks the run as a deliberate violation of the algorithm's assumptions.
    pub fn negative(mut self) -> Self {
        self.negative = true;
        self
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Parse { line: e.line(), message: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn horizon(&self) -> u64 {
        self.horizon.unwrap_or_else(|| {
            self.algorithm
                .default_horizon(self.topology.n as u64, self.model.fairness_window)
        })
    }

    pub fn topology(&self) -> Result<RingTopology, HarnessError> {
        Ok(RingTopology::new(self.topology.n, self.topology.landmark)?)
    }

    /// Field-level validation; assumption checks are skipped for negative runs.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut errs = Vec::new();
        let mut bad = |field: &str, message: String| {
            errs.push(FieldError {
                field: field.to_string(),
                message,
            })
        };
        let n = self.topology.n;
        if n < 3 {
            bad("topology.n", format!("ring size must be at least 3, got {n}"));
        }
        if let Some(l) = self.topology.landmark {
            if l >= n {
                bad("topology.landmark", format!("node {l} out of range"));
            }
        }
        let starts = &self.agents.starts;
        if starts.is_empty() {
            bad("agents.starts", "at least one agent is required".into());
        }
        if starts.len() != self.agents.orientations.len() {
            bad(
                "agents.orientations",
                format!("{} orientations for {} agents", self.agents.orientations.len(), starts.len()),
            );
        }
        for (i, &s) in starts.iter().enumerate() {
            if s >= n {
                bad(&format!("agents.starts[{i}]"), format!("node {s} out of range"));
            }
        }
        if self.model.synchrony == Synchrony::Ssync && self.model.fairness_window == 0 {
            bad("model.fairness_window", "must be at least 1".into());
        }
        if let Some(0) = self.horizon {
            bad("horizon", "must be positive".into());
        }
        if let crate::adversary::AdversaryParams::Random { p_missing } = self.adversary {
            if !(0.0..=1.0).contains(&p_missing) {
                bad("adversary.p_missing", format!("{p_missing} is not a probability"));
            }
        }
        if !self.negative {
            let req = self.algorithm.requirements();
            if starts.len() != req.agents {
                bad(
                    "agents.starts",
                    format!("{} needs {} agents, got {}", self.algorithm.name(), req.agents, starts.len()),
                );
            }
            if req.chirality && self.agents.orientations.windows(2).any(|w| w[0] != w[1]) {
                bad("agents.orientations", format!("{} assumes chirality", self.algorithm.name()));
            }
            if req.landmark && self.topology.landmark.is_none() {
                bad("topology.landmark", format!("{} needs a landmark", self.algorithm.name()));
            }
            if req.starts_at_landmark && starts.iter().any(|&s| Some(s) != self.topology.landmark) {
                bad("agents.starts", "agents must start at the landmark".into());
            }
            if req.synchrony != self.model.synchrony {
                bad(
                    "model.synchrony",
                    format!("{} is designed for {:?}", self.algorithm.name(), req.synchrony),
                );
            }
            if self.model.synchrony == Synchrony::Ssync
                && !req.transports.contains(&self.model.transport)
            {
                bad(
                    "model.transport",
                    format!("{} does not support {:?}", self.algorithm.name(), self.model.transport),
                );
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "topology": {"n": 5},
        "model": {"synchrony": "fsync", "transport": "pt", "fairness_window": 1},
        "algorithm": {"name": "known_n_with_chirality", "N": 5},
        "agents": {"starts": [0, 2], "orientations": [1, 1]},
        "adversary": {"name": "random", "p_missing": 0.5},
        "seed": 7
    }"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::from_json(SAMPLE).unwrap();
        assert_eq!(c.horizon(), 16);
        for algo in AlgorithmParams::catalog(6) {
            ExperimentConfig::for_algorithm(algo, 6).validate().unwrap();
        }
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn reports_offending_fields() {
        let text = SAMPLE.replace(r#""n": 5"#, r#""n": 2"#).replace("[0, 2]", "[0, 9]");
        match ExperimentConfig::from_json(&text) {
            Err(HarnessError::Config(errs)) => {
                let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
                assert!(fields.contains(&"topology.n"));
                assert!(fields.contains(&"agents.starts[1]"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chirality_mismatch_is_rejected_unless_negative() {
        let text = SAMPLE.replace("[1, 1]", "[1, -1]");
        assert!(ExperimentConfig::from_json(&text).is_err());
        let text = text.replace(r#""seed": 7"#, r#""seed": 7, "negative": true"#);
        assert!(ExperimentConfig::from_json(&text).is_ok());
    }

    #[test]
    fn malformed_json_reports_line() {
        match ExperimentConfig::from_json("{\n\"topology\": }") {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
