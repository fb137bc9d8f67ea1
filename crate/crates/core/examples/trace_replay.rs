//! Recording a run as a JSONL trace and re-executing it.
//!
//! The first line of a trace is a header with the config and digest; every
//! further line is one round. Replay re-applies the recorded decisions and
//! compares each round. Edited or truncated traces are rejected.

use dynring::adversary::AdversaryParams;
use dynring::algorithms::AlgorithmParams;
use dynring::harness::{read_trace, replay, run_with, write_trace, ExperimentConfig, RunOptions, TraceHeader};

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("run.jsonl");
    let config = ExperimentConfig::for_algorithm(AlgorithmParams::KnownNNoChirality { bound: 8 }, 6)
        .with_adversary(AdversaryParams::Random { p_missing: 0.5 })
        .with_seed(7);
    let mut strategy = config.adversary.build(config.seed);
    let art = run_with(&config, strategy.as_mut(), &RunOptions { trace: true, frames: false }).expect("valid config");
    let header = TraceHeader {
        config: config.clone(),
        rounds: art.result.rounds,
        digest: art.result.trace_digest.clone(),
    };
    write_trace(&path, &header, &art.trace).expect("writable");
    println!("recorded {} rounds, digest {}", art.trace.len(), &header.digest[..16]);

    let report = replay(&path).expect("well-formed trace");
    println!("replay matches: {}, first divergence {:?}", report.matches(), report.first_divergence);

    // Two missing edges in one round are not a legal decision.
    let mut file = read_trace(&path).expect("well-formed trace");
    file.records[2].missing = vec![0, 3];
    let edited = dir.path().join("edited.jsonl");
    write_trace(&edited, &file.header, &file.records).expect("writable");
    let report = replay(&edited).expect("still parses");
    let first = report.result.violations.first().map(|v| (v.round(), v.label()));
    println!("edited trace: matches {}, first violation {first:?}", report.matches());

    let text = std::fs::read_to_string(&path).expect("readable");
    let cut = text.len() - text.lines().last().map_or(0, |l| l.len() / 2) - 1;
    let truncated = dir.path().join("truncated.jsonl");
    std::fs::write(&truncated, &text[..cut]).expect("writable");
    match replay(&truncated) {
        Ok(_) => println!("truncated trace unexpectedly accepted"),
        Err(e) => println!("truncated trace: {e}"),
    }
}
