//! Why an upper bound is not enough under eventual transport.
//!
//! The same scheduler drives a 4-ring and a 6-ring so that every agent sees
//! exactly the same snapshots on both. An algorithm that terminates on the
//! small ring therefore terminates at the same round on the large one,
//! before the large ring is explored.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{first_observation_divergence, run_with, ExperimentConfig, RunOptions};
use dynring::ring::{ExecutionModel, Orientation::*, Transport};

fn main() {
    let (n_small, n_large) = (4, 6);
    let opts = RunOptions { trace: false, frames: true };
    let algos = [
        (AlgorithmParams::PtBoundNoChirality { bound: n_large as u64 }, vec![0, 1, 3], vec![Positive, Negative, Positive]),
        (AlgorithmParams::EtBoundNoChirality { n: n_small as u64 }, vec![0, 1, 3], vec![Positive, Negative, Positive]),
        (AlgorithmParams::EtPerpetualWithChirality, vec![0, 2], vec![Positive; 2]),
    ];
    for (algo, starts, orientations) in algos {
        let on = |n: usize| {
            let config = ExperimentConfig::for_algorithm(algo.clone(), n)
                .with_model(ExecutionModel::ssync(Transport::Et, 8))
                .with_agents(starts.clone(), orientations.clone())
                .with_adversary(AdversaryParams::EtTwoRingConfuser { n_small })
                .with_horizon(500)
                .negative();
            let mut strategy = config.adversary.build(config.seed);
            run_with(&config, strategy.as_mut(), &opts).expect("valid config")
        };
        let (small, large) = (on(n_small), on(n_large));
        println!(
            "{:28} divergence {:?}; small ring: terminations {:?}, explored {:?}; large ring: terminations {:?}, explored {:?}, sound {}",
            algo.name(),
            first_observation_divergence(&small, &large),
            small.result.terminations,
            small.result.explored_round,
            large.result.terminations,
            large.result.explored_round,
            large.result.sound()
        );
    }
}
