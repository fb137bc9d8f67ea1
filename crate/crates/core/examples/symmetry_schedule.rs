//! Identifier construction and the phase-based reversal schedule.
//!
//! Shows how three register values become an identifier and a signature
//! string, how the signature is stretched over successive phases, and when
//! two distinct identifiers first share a long common-direction window.

use dynring::ring::LocalDir;
use dynring::symmetry::{
    common_direction_round, common_run_end, compute_id, heading_run_end, phase_string, s_string,
    DirectionSchedule,
};

fn arrows(s: &DirectionSchedule, from: u64, to: u64) -> String {
    (from..to)
        .map(|r| match s.direction(r) {
            LocalDir::Left => '<',
            LocalDir::Right => '>',
        })
        .collect()
}

fn main() {
    let id = compute_id(1, 2, 0).expect("small registers");
    let sched = DirectionSchedule::new(id);
    println!("id(1, 2, 0) = {} = {:b}", id.0, id.0);
    println!("signature {} padded to 2^{}", s_string(id), sched.jbar);
    for j in sched.jbar + 1..sched.jbar + 3 {
        println!("phase {j}: {}", phase_string(id, j));
    }
    println!("rounds 0..64: {}", arrows(&sched, 0, 64));

    let (c, n) = (5, 8);
    let pairs = [((1, 2, 0), (2, 1, 0)), ((3, 5, 7), (3, 5, 6)), ((0, 0, 1), (7, 7, 7))];
    for (x, y) in pairs {
        let (a, b) = (compute_id(x.0, x.1, x.2).unwrap(), compute_id(y.0, y.1, y.2).unwrap());
        let bits = u64::from(128 - a.0.max(b.0).leading_zeros());
        let limit = common_direction_round(bits, c, n);
        let (sa, sb) = (DirectionSchedule::new(a), DirectionSchedule::new(b));
        let agree = common_run_end(&sa, &sb, true, c * n, limit);
        let oppose = common_run_end(&sa, &sb, false, c * n, limit);
        let left = heading_run_end(&sa, LocalDir::Left, c * n, limit);
        let right = heading_run_end(&sa, LocalDir::Right, c * n, limit);
        println!(
            "{x:?} vs {y:?}: {}-round windows end by {agree:?} (same chirality) / {oppose:?} (opposite); \
             own runs left {left:?} right {right:?}; guaranteed before {limit}",
            c * n
        );
    }
}
