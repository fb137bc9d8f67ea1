//! Two agents that know an upper bound `N` on the ring size.
//!
//! Runs both known-bound algorithms against a random adversary and a
//! frontier-blocking adversary, and reports the latest termination against
//! the `3N` and `5N` bounds.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{campaign, CampaignSpec, ExperimentConfig};

fn main() {
    let n = 10;
    let bound = 12;
    let cases = [
        (AlgorithmParams::KnownNWithChirality { bound }, 3 * bound),
        (AlgorithmParams::KnownNNoChirality { bound }, 5 * bound),
    ];
    let adversaries = [
        AdversaryParams::Random { p_missing: 0.5 },
        AdversaryParams::GreedyBlockFrontier,
    ];
    for (algo, limit) in cases {
        for adv in &adversaries {
            let template = ExperimentConfig::for_algorithm(algo.clone(), n).with_adversary(adv.clone());
            let spec = CampaignSpec::new(template, 500).random_starts(false).random_orientations();
            let summary = campaign(&spec).expect("valid template");
            let latest = summary
                .results
                .iter()
                .filter_map(|r| r.last_termination_round())
                .max()
                .unwrap_or(0);
            let unsound = summary.results.iter().filter(|r| !r.sound()).count();
            println!(
                "{:24} vs {:22} n={n} N={bound}: latest termination {latest} (bound {limit}), unsound {unsound}, violations {}, mean moves {:.1}",
                algo.name(),
                adv.label(),
                summary.violating_runs(),
                summary.mean_total_moves()
            );
        }
    }
}
