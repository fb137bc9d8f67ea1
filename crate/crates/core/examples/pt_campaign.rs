//! Semi-synchronous exploration under passive transport.
//!
//! Runs the bound-based and landmark PT algorithms against random and
//! frontier-blocking schedulers, compares moves with `20 N^2`, then lets the
//! window-shifting lower-bound scheduler show moves growing with `N`.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{campaign, run, CampaignSpec, ExperimentConfig};
use dynring::ring::Orientation;

fn main() {
    let n = 8;
    let bound = 12u64;
    let algos = [
        AlgorithmParams::PtBoundWithChirality { bound },
        AlgorithmParams::PtLandmarkWithChirality,
        AlgorithmParams::PtBoundNoChirality { bound },
    ];
    for algo in algos {
        for adv in [AdversaryParams::Random { p_missing: 0.5 }, AdversaryParams::GreedyBlockFrontier] {
            // A pinned survivor would otherwise idle until the default horizon.
            let template = ExperimentConfig::for_algorithm(algo.clone(), n)
                .with_adversary(adv.clone())
                .with_horizon(2000);
            let spec = CampaignSpec::new(template, 500).random_starts(true).random_orientations();
            let summary = campaign(&spec).expect("valid template");
            let silent = summary.results.iter().filter(|r| !r.any_terminated()).count();
            println!(
                "{:26} vs {:22}: max moves {} (20N^2 = {}), runs without termination {silent}, violations {}",
                algo.name(),
                adv.label(),
                summary.max_total_moves(),
                20 * bound * bound,
                summary.violating_runs()
            );
        }
    }
    for bound in [8, 16, 32] {
        let config = ExperimentConfig::for_algorithm(AlgorithmParams::PtBoundWithChirality { bound }, n)
            .with_agents(vec![0, 2], vec![Orientation::Positive; 2])
            .with_adversary(AdversaryParams::PtLowerBoundShifter { window: None })
            .with_horizon(50 * bound);
        let r = run(&config).expect("valid config");
        println!(
            "lower-bound scheduler, N={bound:2}: {} moves, first termination {:?}",
            r.total_moves, r.first_termination_round
        );
    }
}
