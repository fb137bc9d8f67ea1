//! Exploration with a landmark node and no knowledge of the ring size.
//!
//! With chirality, an adversary that only keeps the agents apart cannot delay
//! termination beyond `7n - 2`. Without chirality the agents first acquire
//! identifiers from their first blocks, then steer by the identifier's
//! reversal schedule until they move the same way long enough.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::{landmark_no_chirality_bound, AlgorithmParams};
use dynring::harness::{campaign, CampaignSpec, ExperimentConfig};

fn main() {
    for n in [4, 8, 12] {
        let template = ExperimentConfig::for_algorithm(AlgorithmParams::LandmarkWithChirality, n)
            .with_adversary(AdversaryParams::PreventMeeting { p_extra: 0.5 });
        let summary = campaign(&CampaignSpec::new(template, 200).random_starts(true)).expect("valid template");
        let latest = summary.results.iter().filter_map(|r| r.last_termination_round()).max();
        let encounters: u64 = summary.results.iter().map(|r| r.events.encounters()).sum();
        println!(
            "landmark_with_chirality n={n:2}: latest termination {latest:?} (bound {}), encounters {encounters}, violations {}",
            7 * n - 2,
            summary.violating_runs()
        );
    }
    for algo in [AlgorithmParams::StartFromLandmarkNoChirality, AlgorithmParams::LandmarkNoChirality] {
        for n in [4, 6, 8] {
            let template = ExperimentConfig::for_algorithm(algo.clone(), n)
                .with_adversary(AdversaryParams::Random { p_missing: 0.5 });
            let spec = CampaignSpec::new(template, 40).random_starts(false).random_orientations();
            let summary = campaign(&spec).expect("valid template");
            let latest = summary.results.iter().filter_map(|r| r.last_termination_round()).max();
            let unsound = summary.results.iter().filter(|r| !r.sound()).count();
            println!(
                "{:32} n={n}: latest termination {latest:?} (bound {}), unsound {unsound}, mean moves {:.0}",
                algo.name(),
                landmark_no_chirality_bound(n as u64),
                summary.mean_total_moves()
            );
        }
    }
}
