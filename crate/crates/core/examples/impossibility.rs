//! Schedulers that defeat every algorithm when its assumptions are dropped.
//!
//! A lone agent is pinned by always removing the edge it wants. Without any
//! simultaneity guarantee, agents are pinned by activating only those that
//! want the same side. Removing every edge that would bring the agents
//! together suppresses all encounter events.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{run, ExperimentConfig};
use dynring::ring::{ExecutionModel, Orientation, Transport};

fn main() {
    let n = 8;
    let rounds = 1000;
    for algo in AlgorithmParams::catalog(n as u64) {
        let base = ExperimentConfig::for_algorithm(algo.clone(), n)
            .with_horizon(rounds)
            .negative();
        let solo = base
            .clone()
            .with_agents(vec![0], vec![Orientation::Positive])
            .with_adversary(AdversaryParams::BlockSingleAgent { target: 0 });
        let ns = base
            .clone()
            .with_model(ExecutionModel::ssync(Transport::Ns, 8))
            .with_agents(vec![0, 0], vec![Orientation::Positive; 2])
            .with_adversary(AdversaryParams::NsAlternator);
        let apart = base.with_adversary(AdversaryParams::PreventMeeting { p_extra: 0.5 });
        let solo = run(&solo).expect("valid config");
        let ns = run(&ns).expect("valid config");
        let apart = run(&apart).expect("valid config");
        println!(
            "{:32} solo visited {}, NS visited {}, kept apart: {} encounters",
            algo.name(),
            solo.visited_count(),
            ns.visited_count(),
            apart.events.encounters()
        );
    }
}
