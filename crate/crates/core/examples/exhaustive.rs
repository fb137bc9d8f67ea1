//! Exhaustive schedule verification on the smallest ring.
//!
//! Checks every start placement of the known-bound algorithms against all
//! `(n + 1)^H` missing-edge schedules.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{exhaustive_verify, AgentsConfig, ExperimentConfig, TopologyConfig};
use dynring::ring::{ExecutionModel, Orientation};

fn config(algorithm: AlgorithmParams, landmark: Option<usize>, starts: [usize; 2], o: [Orientation; 2]) -> ExperimentConfig {
    ExperimentConfig {
        topology: TopologyConfig { n: 3, landmark },
        model: ExecutionModel::fsync(),
        algorithm,
        agents: AgentsConfig {
            starts: starts.to_vec(),
            orientations: o.to_vec(),
        },
        adversary: AdversaryParams::None,
        seed: 0,
        horizon: None,
        stop_when_explored: false,
        negative: false,
    }
}

fn main() {
    use Orientation::{Negative as M, Positive as P};
    let cases: Vec<(&str, AlgorithmParams, Option<usize>, u64, Vec<[Orientation; 2]>)> = vec![
        ("known_n_with_chirality", AlgorithmParams::KnownNWithChirality { bound: 3 }, None, 9, vec![[P, P], [M, M]]),
        ("known_n_no_chirality", AlgorithmParams::KnownNNoChirality { bound: 3 }, None, 15, vec![[P, P], [P, M], [M, P], [M, M]]),
        ("landmark_with_chirality", AlgorithmParams::LandmarkWithChirality, Some(0), 21, vec![[P, P], [M, M]]),
    ];
    for (name, algo, landmark, h, orientations) in cases {
        let start = std::time::Instant::now();
        let mut worst = 0;
        let mut unsound = 0u128;
        let mut unterminated = 0u128;
        for o in &orientations {
            for a in 0..3 {
                for b in 0..3 {
                    let cfg = config(algo.clone(), landmark, [a, b], *o);
                    let r = exhaustive_verify(&cfg, h, u128::MAX).expect("verification runs");
                    worst = worst.max(r.max_termination_round.unwrap_or(0));
                    unsound += r.unsound + r.invariant_failures;
                    unterminated += r.unterminated;
                    if r.unsound > 0 || r.unterminated > 0 {
                        println!("  starts {a},{b} {o:?}: unsound {} unterminated {} states {} cex {:?}", r.unsound, r.unterminated, r.peak_states, r.counterexample);
                    }
                }
            }
        }
        println!(
            "{name}: horizon {h}, latest termination {worst}, unsound {unsound}, unterminated {unterminated}, {:.1?}",
            start.elapsed()
        );
    }
}
