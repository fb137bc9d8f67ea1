//! Exploration without any knowledge of the ring size.
//!
//! The agents never terminate; the campaign measures the round by which the
//! ring was explored against `10n` and writes one CSV row per trial.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{campaign, write_csv, CampaignSpec, ExperimentConfig};

fn main() {
    let out = std::env::temp_dir().join("perpetual.csv");
    let mut rows = Vec::new();
    for n in [8, 16, 32, 64] {
        for adv in [AdversaryParams::Random { p_missing: 0.5 }, AdversaryParams::GreedyBlockFrontier] {
            let template = ExperimentConfig::for_algorithm(AlgorithmParams::PerpetualExploration, n)
                .with_adversary(adv.clone())
                .with_horizon(10 * n as u64);
            let spec = CampaignSpec::new(template, 1000).random_starts(false).random_orientations();
            let summary = campaign(&spec).expect("valid template");
            let latest = summary.results.iter().filter_map(|r| r.explored_round).max();
            let unexplored = summary.results.iter().filter(|r| !r.explored()).count();
            let terminated = summary.results.iter().filter(|r| r.any_terminated()).count();
            println!(
                "n={n:2} {:22} explored by {latest:?} (bound {}), unexplored {unexplored}, terminated {terminated}",
                adv.label(),
                10 * n
            );
            rows.extend(summary.rows);
        }
    }
    write_csv(&rows, &out).expect("writable temp dir");
    println!("{} rows written to {}", rows.len(), out.display());
}
