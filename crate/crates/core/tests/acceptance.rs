//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails. Every tolerance is a constant
//! below.

use std::cell::RefCell;
use std::time::Instant;

use dynring::adversary::AdversaryParams;
use dynring::algorithms::{landmark_no_chirality_bound, AlgorithmParams};
use dynring::harness::{
    exhaustive_verify, first_observation_divergence, replay_records, run_with, CampaignSpec, ExhaustiveReport,
    ExperimentConfig, RunArtifacts, RunOptions, RunResult,
};
use dynring::ring::{ExecutionModel, LocalDir, Orientation, Synchrony, Transport};
use dynring::symmetry::{common_direction_round, common_run_end, compute_id, heading_run_end, DirectionSchedule};

use Orientation::{Negative as M, Positive as P};

/// Exhaustive schedules are refused beyond this many per start placement.
const BUDGET: u128 = 1 << 44;
const PERPETUAL_TRIALS: usize = 10_000;
const PERPETUAL_ROUND_FACTOR: u64 = 10;
const LANDMARK_NO_CATCH_TRIALS: usize = 200;
const LANDMARK_HORIZON: u64 = 21;
const NO_CHIRALITY_TRIALS_PER_SIZE: usize = 80;
const LEMMA_C: u64 = 5;
const LEMMA_MIN_PAIRS: usize = 1000;
const PT_TRIALS: usize = 1000;
const PT_FAIRNESS_WINDOW: u32 = 8;
/// Rounds after which a pinned survivor is abandoned.
const PT_HORIZON: u64 = 2000;
const PT_MOVE_FACTOR: u64 = 20;
/// moves(2N) / moves(N) under the lower-bound scheduler must reach this.
const PT_LOWER_BOUND_RATIO: f64 = 1.9;
const ET_TRIALS: usize = 1000;
const ET_CONFUSER_ROUNDS: u64 = 500;
const IMPOSSIBILITY_ROUNDS: u64 = 1000;
/// Every this many observed runs is also recorded and replayed.
const REPLAY_EVERY: usize = 50;

/// Engine-level observations gathered across all criteria.
#[derive(Default)]
struct Engine {
    runs: usize,
    violating: Vec<String>,
    replays: usize,
    replay_mismatches: usize,
    fairness_excess: usize,
    exhaustive_invariant_failures: u128,
}

thread_local! {
    static ENGINE: RefCell<Engine> = RefCell::new(Engine::default());
}

/// Runs one config, recording engine violations and sampling replays.
fn observe(config: &ExperimentConfig, frames: bool) -> RunArtifacts {
    let sample = ENGINE.with(|e| e.borrow().runs % REPLAY_EVERY == 0);
    let opts = RunOptions { trace: sample, frames };
    let mut strategy = config.adversary.build(config.seed);
    let art = run_with(config, strategy.as_mut(), &opts).expect("valid config");
    ENGINE.with(|e| {
        let mut e = e.borrow_mut();
        e.runs += 1;
        if let Some(v) = art.result.violations.first() {
            e.violating.push(format!("{} seed {}: {v:?}", config.algorithm.name(), config.seed));
        }
        if config.model.synchrony == Synchrony::Ssync && art.result.max_idle >= u64::from(config.model.fairness_window) {
            e.fairness_excess += 1;
        }
        if sample {
            e.replays += 1;
            let report = replay_records(config, &art.trace, &art.result.trace_digest).expect("replayable");
            if !report.matches() || report.recomputed_digest != art.result.trace_digest {
                e.replay_mismatches += 1;
            }
        }
    });
    art
}

fn trials(spec: &CampaignSpec) -> Vec<RunResult> {
    (0..spec.trials).map(|i| observe(&spec.trial(i), false).result).collect()
}

fn exhaustive(config: &ExperimentConfig, horizon: u64) -> ExhaustiveReport {
    let r = exhaustive_verify(config, horizon, BUDGET).expect("within budget");
    ENGINE.with(|e| e.borrow_mut().exhaustive_invariant_failures += r.invariant_failures);
    r
}

fn ring3(algorithm: AlgorithmParams, landmark: Option<usize>, starts: [usize; 2], o: [Orientation; 2]) -> ExperimentConfig {
    ExperimentConfig::for_algorithm(algorithm, 3)
        .with_landmark(landmark)
        .with_agents(starts.to_vec(), o.to_vec())
}

fn all_pairs() -> impl Iterator<Item = [usize; 2]> {
    (0..3).flat_map(|a| (0..3).map(move |b| [a, b]))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let (bound, h) = (3, 9);
    let (mut latest, mut bad, mut unterminated, mut schedules) = (0, 0u128, 0u128, 0u128);
    for o in [[P, P], [M, M]] {
        for starts in all_pairs() {
            let r = exhaustive(&ring3(AlgorithmParams::KnownNWithChirality { bound }, None, starts, o), h);
            latest = latest.max(r.max_termination_round.unwrap_or(u64::MAX));
            bad += r.unsound + r.invariant_failures + r.unexplored;
            unterminated += r.unterminated;
            schedules = r.schedules;
        }
    }
    outcome(
        bad == 0 && unterminated == 0 && latest <= 3 * bound,
        format!("{schedules} schedules x 18 placements: latest termination {latest} <= {}, unsound or unexplored {bad}, unterminated {unterminated}", 3 * bound),
    )
}

fn criterion_2() -> Outcome {
    let (bound, h) = (3, 15);
    let (mut latest, mut bad, mut unterminated) = (0, 0u128, 0u128);
    for o in [[P, P], [P, M], [M, P], [M, M]] {
        for starts in all_pairs() {
            let r = exhaustive(&ring3(AlgorithmParams::KnownNNoChirality { bound }, None, starts, o), h);
            latest = latest.max(r.max_termination_round.unwrap_or(u64::MAX));
            bad += r.unsound + r.invariant_failures;
            unterminated += r.unterminated;
        }
    }
    outcome(
        bad == 0 && unterminated == 0 && latest <= 5 * bound,
        format!("4^15 schedules x 36 placements: latest termination {latest} <= {}, unsound {bad}, unterminated {unterminated}", 5 * bound),
    )
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [8usize, 16, 32, 64] {
        let limit = PERPETUAL_ROUND_FACTOR * n as u64;
        let mut latest = 0;
        let mut failures = 0;
        for adv in [AdversaryParams::Random { p_missing: 0.5 }, AdversaryParams::GreedyBlockFrontier] {
            let template = ExperimentConfig::for_algorithm(AlgorithmParams::PerpetualExploration, n)
                .with_adversary(adv)
                .with_horizon(limit)
                .with_seed(n as u64 * 1_000_003);
            let spec = CampaignSpec::new(template, PERPETUAL_TRIALS / 2).random_starts(false).random_orientations();
            for r in trials(&spec) {
                latest = latest.max(r.explored_round.unwrap_or(u64::MAX));
                failures += usize::from(r.explored_round.map_or(true, |e| e > limit) || r.any_terminated());
            }
        }
        pass &= failures == 0;
        parts.push(format!("n={n}: explored by {latest} <= {limit}"));
    }
    outcome(pass, format!("{PERPETUAL_TRIALS} trials per size, no terminations; {}", parts.join(", ")))
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut worst_slack = i64::MAX;
    for n in 4..=12usize {
        let limit = 7 * n as u64 - 2;
        let template = ExperimentConfig::for_algorithm(AlgorithmParams::LandmarkWithChirality, n)
            .with_adversary(AdversaryParams::PreventMeeting { p_extra: 0.5 })
            .with_seed(n as u64 * 7919);
        let spec = CampaignSpec::new(template, LANDMARK_NO_CATCH_TRIALS).random_starts(true).random_orientations();
        for r in trials(&spec) {
            let last = r.last_termination_round();
            let ok = r.all_terminated() && r.sound() && r.events.encounters() == 0 && last.is_some_and(|t| t <= limit);
            pass &= ok;
            worst_slack = worst_slack.min(limit as i64 - last.map_or(i64::MAX, |t| t as i64));
        }
    }
    let mut bad = 0u128;
    for o in [[P, P], [M, M]] {
        for starts in all_pairs() {
            let r = exhaustive(&ring3(AlgorithmParams::LandmarkWithChirality, Some(0), starts, o), LANDMARK_HORIZON);
            bad += r.unsound + r.invariant_failures;
        }
    }
    outcome(
        pass && bad == 0,
        format!(
            "(a) n=4..12, {LANDMARK_NO_CATCH_TRIALS} kept-apart trials each: all terminated by 7n-2 (min slack {worst_slack}); \
             (b) n=3, H={LANDMARK_HORIZON}, 18 placements: unsound {bad}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut count = 0;
    let mut worst_slack = i64::MAX;
    for algo in [AlgorithmParams::StartFromLandmarkNoChirality, AlgorithmParams::LandmarkNoChirality] {
        for n in 4..=16usize {
            let limit = landmark_no_chirality_bound(n as u64);
            for adv in [AdversaryParams::Random { p_missing: 0.5 }, AdversaryParams::GreedyBlockFrontier] {
                let template = ExperimentConfig::for_algorithm(algo.clone(), n)
                    .with_adversary(adv)
                    .with_seed(n as u64 * 104_729);
                let spec = CampaignSpec::new(template, NO_CHIRALITY_TRIALS_PER_SIZE / 2)
                    .random_starts(false)
                    .random_orientations();
                for r in trials(&spec) {
                    count += 1;
                    let last = r.last_termination_round();
                    pass &= r.all_terminated() && r.sound() && last.is_some_and(|t| t <= limit);
                    worst_slack = worst_slack.min(limit as i64 - last.map_or(i64::MAX, |t| t as i64));
                }
            }
        }
    }
    let (pairs, lemma_failures) = common_direction_lemma();
    outcome(
        pass && lemma_failures == 0 && pairs >= LEMMA_MIN_PAIRS,
        format!(
            "{count} trials over n=4..16: all terminated soundly within the bound (min slack {worst_slack}); \
             lemma on {pairs} ID pairs: {lemma_failures} failures"
        ),
    )
}

/// Distinct identifiers from sampled register triples must share a run of
/// `c n` rounds of equal and of opposite local direction, and each must head
/// both ways for `c n` rounds, before the lemma's round.
fn common_direction_lemma() -> (usize, usize) {
    let (mut pairs, mut failures) = (0, 0);
    for n in [4u64, 8, 16] {
        for r1 in 0..n {
            for r2 in 0..n {
                for r3 in 0..n {
                    for (q1, q2, q3) in [(r2, r1, r3), (r1, r3, r2), (n - 1 - r1, r2, r3)] {
                        let (a, b) = (compute_id(r1, r2, r3).unwrap(), compute_id(q1, q2, q3).unwrap());
                        if a == b {
                            continue;
                        }
                        pairs += 1;
                        let bits = u64::from(128 - a.0.max(b.0).leading_zeros());
                        let limit = common_direction_round(bits, LEMMA_C, n);
                        let len = LEMMA_C * n;
                        let (sa, sb) = (DirectionSchedule::new(a), DirectionSchedule::new(b));
                        let shared = [true, false].iter().all(|&agree| common_run_end(&sa, &sb, agree, len, limit).is_some());
                        let both_ways = [&sa, &sb].iter().all(|s| {
                            [LocalDir::Left, LocalDir::Right].iter().all(|&d| heading_run_end(s, d, len, limit).is_some())
                        });
                        failures += usize::from(!(shared && both_ways));
                    }
                }
            }
        }
    }
    (pairs, failures)
}

fn pt_config(algo: AlgorithmParams, n: usize, adv: AdversaryParams, seed: u64) -> ExperimentConfig {
    ExperimentConfig::for_algorithm(algo, n)
        .with_model(ExecutionModel::ssync(Transport::Pt, PT_FAIRNESS_WINDOW))
        .with_adversary(adv)
        .with_horizon(PT_HORIZON)
        .with_seed(seed)
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let configs = [
        (AlgorithmParams::PtBoundWithChirality { bound: 8 }, 5, 8),
        (AlgorithmParams::PtBoundWithChirality { bound: 12 }, 8, 12),
        (AlgorithmParams::PtLandmarkWithChirality, 5, 5),
        (AlgorithmParams::PtLandmarkWithChirality, 8, 8),
        (AlgorithmParams::PtBoundNoChirality { bound: 8 }, 5, 8),
        (AlgorithmParams::PtBoundNoChirality { bound: 12 }, 8, 12),
    ];
    for (algo, n, bound) in configs {
        let budget = PT_MOVE_FACTOR * bound * bound;
        let mut max_moves = 0;
        for adv in [AdversaryParams::Random { p_missing: 0.5 }, AdversaryParams::GreedyBlockFrontier] {
            let spec = CampaignSpec::new(pt_config(algo.clone(), n, adv, bound * 31 + n as u64), PT_TRIALS / 2)
                .random_starts(true)
                .random_orientations();
            for r in trials(&spec) {
                max_moves = max_moves.max(r.total_moves);
                pass &= r.any_terminated() && r.sound() && r.total_moves <= budget;
            }
        }
        parts.push(format!("{} n={n} N={bound}: max moves {max_moves} <= {budget}", algo.name()));
    }
    let shifted = |bound: u64| {
        let config = pt_config(
            AlgorithmParams::PtBoundWithChirality { bound },
            8,
            AdversaryParams::PtLowerBoundShifter { window: None },
            0,
        )
        .with_agents(vec![0, 2], vec![P, P])
        .with_horizon(50 * bound);
        observe(&config, false).result.total_moves
    };
    let (m16, m32) = (shifted(16), shifted(32));
    let ratio = m32 as f64 / m16.max(1) as f64;
    pass &= ratio >= PT_LOWER_BOUND_RATIO;
    parts.push(format!("lower-bound scheduler n=8: {m16} moves at N=16, {m32} at N=32 (ratio {ratio:.2} >= {PT_LOWER_BOUND_RATIO})"));
    outcome(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut runs = 0;
    for n in 4..=8usize {
        for adv in [AdversaryParams::Random { p_missing: 0.5 }, AdversaryParams::GreedyBlockFrontier] {
            let template = ExperimentConfig::for_algorithm(AlgorithmParams::EtBoundNoChirality { n: n as u64 }, n)
                .with_adversary(adv)
                .with_horizon(PT_HORIZON)
                .with_seed(n as u64 * 65_537);
            let spec = CampaignSpec::new(template, ET_TRIALS / 10).random_starts(true).random_orientations();
            for r in trials(&spec) {
                runs += 1;
                pass &= r.any_terminated() && r.sound();
            }
        }
    }
    let (n_small, n_large) = (4, 6);
    let on = |n: usize| {
        let config = ExperimentConfig::for_algorithm(AlgorithmParams::EtBoundNoChirality { n: n_large as u64 + 1 }, n)
            .with_agents(vec![0, 1, 3], vec![P, M, P])
            .with_adversary(AdversaryParams::EtTwoRingConfuser { n_small })
            .with_horizon(ET_CONFUSER_ROUNDS)
            .negative();
        observe(&config, true)
    };
    let (small, large) = (on(n_small), on(n_large));
    let same = small.frames.len() as u64 == ET_CONFUSER_ROUNDS
        && large.frames.len() as u64 == ET_CONFUSER_ROUNDS
        && first_observation_divergence(&small, &large).is_none();
    let confused = !large.result.any_terminated() || !large.result.sound();
    outcome(
        pass && same && confused,
        format!(
            "{runs} fair ET trials, n=4..8: each with a sound termination; rings {n_small}/{n_large} indistinguishable for \
             {ET_CONFUSER_ROUNDS} rounds: {same}; upper-bound variant on the large ring: terminations {:?}, explored {:?}",
            large.result.terminations, large.result.explored_round
        ),
    )
}

fn criterion_8() -> Outcome {
    let n = 8;
    let mut failures = Vec::new();
    for algo in AlgorithmParams::catalog(n as u64) {
        let base = ExperimentConfig::for_algorithm(algo.clone(), n)
            .with_horizon(IMPOSSIBILITY_ROUNDS)
            .negative();
        let solo = base
            .clone()
            .with_agents(vec![0], vec![P])
            .with_adversary(AdversaryParams::BlockSingleAgent { target: 0 });
        let ns = base
            .clone()
            .with_model(ExecutionModel::ssync(Transport::Ns, PT_FAIRNESS_WINDOW))
            .with_agents(vec![0, 0], vec![P, P])
            .with_adversary(AdversaryParams::NsAlternator);
        let apart = base.with_adversary(AdversaryParams::PreventMeeting { p_extra: 0.5 });
        let solo = observe(&solo, false).result;
        let ns = observe(&ns, false).result;
        let apart = observe(&apart, false).result;
        if solo.visited_count() != 1 || ns.visited_count() != 1 || apart.events.encounters() != 0 {
            failures.push(format!(
                "{}: solo {} nodes, NS {} nodes, {} encounters",
                algo.name(),
                solo.visited_count(),
                ns.visited_count(),
                apart.events.encounters()
            ));
        }
    }
    let detail = if failures.is_empty() {
        format!("11 algorithms x 3 schedulers over {IMPOSSIBILITY_ROUNDS} rounds: pinned to the start node, zero encounters")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_9() -> Outcome {
    ENGINE.with(|e| {
        let e = e.borrow();
        let pass = e.violating.is_empty()
            && e.replay_mismatches == 0
            && e.fairness_excess == 0
            && e.exhaustive_invariant_failures == 0
            && e.replays > 0;
        let mut detail = format!(
            "{} runs: {} with violations; {} replays, {} mismatched; {} fairness excesses; {} exhaustive invariant failures",
            e.runs,
            e.violating.len(),
            e.replays,
            e.replay_mismatches,
            e.fairness_excess,
            e.exhaustive_invariant_failures
        );
        if let Some(first) = e.violating.first() {
            detail.push_str(&format!("; first: {first}"));
        }
        outcome(pass, detail)
    })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("known bound with chirality, exhaustive", criterion_1),
        ("known bound without chirality, exhaustive", criterion_2),
        ("perpetual exploration", criterion_3),
        ("landmark with chirality", criterion_4),
        ("landmark without chirality", criterion_5),
        ("passive transport", criterion_6),
        ("eventual transport", criterion_7),
        ("impossibility schedulers", criterion_8),
        ("engine invariants", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {}: {} [{name}] {} ({:.1?})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
