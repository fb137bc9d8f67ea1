//! Identifier construction and the phase-based reversal schedule used to
//! break symmetry between anonymous agents without a common orientation.
//!
//! Round `r >= 2` belongs to phase `j = floor(log2 r)`, i.e. the interval
//! `(2^j - 1, 2^(j+1) - 1]`. An identifier is turned into a self-delimiting
//! string, padded to a power of two, and in every sufficiently late phase
//! each character is stretched so that the string exactly covers the phase.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::LocalDir;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("round {0} precedes the first phase")]
    NoPhase(u64),
    #[error("register values too large to interleave into 128 bits")]
    IdOverflow,
}

/// Interleaved identifier built from three round counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u128);

fn bit_len(x: u128) -> u32 {
    128 - x.leading_zeros()
}

/// Round-robin interleaving of the binary forms of `(r1, r2, r3)`, most
/// significant bit first, each padded to the width of the largest.
pub fn compute_id(r1: u64, r2: u64, r3: u64) -> Result<AgentId, SymmetryError> {
    let w = bit_len(u128::from(r1.max(r2).max(r3).max(1)));
    if 3 * w > 128 {
        return Err(SymmetryError::IdOverflow);
    }
    let mut id: u128 = 0;
    for bit in (0..w).rev() {
        for r in [r1, r2, r3] {
            id = (id << 1) | u128::from((r >> bit) & 1);
        }
    }
    Ok(AgentId(id))
}

/// Minimal binary form of `x`; zero is `"0"`.
pub fn binary(x: u128) -> String {
    format!("{x:b}")
}

/// `"10" ++ binary(id) ++ "0"`.
pub fn s_string(id: AgentId) -> String {
    format!("10{}0", binary(id.0))
}

/// Repeats every character of `s` exactly `k` times.
pub fn dup(s: &str, k: usize) -> String {
    s.chars()
        .flat_map(|c| std::iter::repeat(c).take(k))
        .collect()
}

pub fn phase_of(r: u64) -> Result<u32, SymmetryError> {
    if r < 2 {
        return Err(SymmetryError::NoPhase(r));
    }
    Ok(63 - r.leading_zeros())
}

/// Precomputed reversal schedule for one identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectionSchedule {
    /// First phase whose length fits the signature string.
    pub jbar: u32,
    /// Signature left-padded with zeros to length `2^jbar`.
    pub padded: Vec<bool>,
}

impl DirectionSchedule {
    pub fn new(id: AgentId) -> Self {
        let s = s_string(id);
        let len = s.len();
        let jbar = usize::BITS - (len - 1).leading_zeros();
        let width = 1usize << jbar;
        let mut padded = vec![false; width - len];
        padded.extend(s.bytes().map(|b| b == b'1'));
        Self { jbar, padded }
    }

    pub fn direction(&self, r: u64) -> LocalDir {
        let Ok(j) = phase_of(r) else {
            return LocalDir::Left;
        };
        if j <= self.jbar {
            return LocalDir::Left;
        }
        let offset = r - (1u64 << j);
        let stretch = j - self.jbar;
        if self.padded[(offset >> stretch) as usize] {
            LocalDir::Right
        } else {
            LocalDir::Left
        }
    }

    pub fn switch(&self, r: u64) -> bool {
        r >= 1 && self.direction(r) != self.direction(r - 1)
    }
}

/// `d(ID, j)` for `j > jbar`, as a string; empty for earlier phases.
pub fn phase_string(id: AgentId, j: u32) -> String {
    let sched = DirectionSchedule::new(id);
    if j <= sched.jbar {
        return String::new();
    }
    let padded: String = sched
        .padded
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    dup(&padded, 1 << (j - sched.jbar))
}

pub fn direction(id: AgentId, r: u64) -> LocalDir {
    DirectionSchedule::new(id).direction(r)
}

pub fn switch(id: AgentId, r: u64) -> bool {
    DirectionSchedule::new(id).switch(r)
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u64 {
    u64::from(64 - n.saturating_sub(1).leading_zeros())
}

/// Round by which two agents with distinct identifiers of at most
/// `id_bits` bits are guaranteed a common-direction window of `c * n`
/// rounds, each also having had `c * n` rounds in either direction.
pub fn common_direction_round(id_bits: u64, c: u64, n: u64) -> u64 {
    32 * ((id_bits + 3) * c * n) + 1
}

/// Identifier length bound for agents whose registers are all below `n`.
pub fn id_bits_bound(n: u64) -> u64 {
    3 * ceil_log2(n.max(2))
}

/// Termination deadline once the ring size is known.
pub fn exploration_deadline(n: u64) -> u64 {
    common_direction_round(id_bits_bound(n), 5, n) - 1
}

/// Earliest round ending a run of `len` consecutive rounds in which the two
/// schedules point the same way locally (`agree`) or opposite ways, scanning
/// rounds `0..limit`.
pub fn common_run_end(a: &DirectionSchedule, b: &DirectionSchedule, agree: bool, len: u64, limit: u64) -> Option<u64> {
    run_end(|r| (a.direction(r) == b.direction(r)) == agree, len, limit)
}

/// Earliest round ending a run of `len` consecutive rounds heading `dir`.
pub fn heading_run_end(s: &DirectionSchedule, dir: LocalDir, len: u64, limit: u64) -> Option<u64> {
    run_end(|r| s.direction(r) == dir, len, limit)
}

fn run_end(pred: impl Fn(u64) -> bool, len: u64, limit: u64) -> Option<u64> {
    let mut run = 0;
    for r in 0..limit {
        run = if pred(r) { run + 1 } else { 0 };
        if run >= len {
            return Some(r);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compute_id_examples() {
        assert_eq!(compute_id(1, 2, 0).unwrap(), AgentId(0b010100));
        assert_eq!(compute_id(1, 2, 0).unwrap().0, 20);
        assert_eq!(compute_id(0, 0, 0).unwrap(), AgentId(0));
        assert_eq!(compute_id(1, 0, 0).unwrap(), AgentId(0b100));
        assert_ne!(compute_id(2, 1, 0).unwrap(), compute_id(1, 2, 0).unwrap());
    }

    #[test]
    fn s_string_examples() {
        assert_eq!(s_string(AgentId(5)), "101010");
        assert_eq!(s_string(AgentId(1)), "1010");
        assert_eq!(s_string(AgentId(0)), "1000");
    }

    #[test]
    fn dup_examples() {
        assert_eq!(dup("10", 2), "1100");
        assert_eq!(dup("", 3), "");
        assert_eq!(dup("101", 1), "101");
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_of(2).unwrap(), 1);
        assert_eq!(phase_of(3).unwrap(), 1);
        assert_eq!(phase_of(5).unwrap(), 2);
        assert_eq!(phase_of(8).unwrap(), 3);
        assert_eq!(phase_of(1), Err(SymmetryError::NoPhase(1)));
        assert_eq!(phase_of(0), Err(SymmetryError::NoPhase(0)));
    }

    #[test]
    fn direction_examples_for_id_one() {
        let id = AgentId(1);
        let sched = DirectionSchedule::new(id);
        assert_eq!(sched.jbar, 2);
        assert_eq!(direction(id, 8), LocalDir::Right);
        assert_eq!(direction(id, 9), LocalDir::Right);
        assert_eq!(direction(id, 10), LocalDir::Left);
        assert!(switch(id, 10));
        assert!(!switch(id, 9));
        for r in 0..8 {
            assert_eq!(direction(id, r), LocalDir::Left);
        }
    }

    #[test]
    fn phase_string_covers_phase() {
        let id = AgentId(1);
        assert_eq!(phase_string(id, 3), "11001100");
        assert_eq!(phase_string(id, 2), "");
        for r in 8..16u64 {
            let expected = phase_string(id, 3).as_bytes()[(r - 8) as usize] == b'1';
            assert_eq!(direction(id, r) == LocalDir::Right, expected);
        }
    }

    #[test]
    fn ceil_log2_examples() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(16), 4);
    }

    #[test]
    fn distinct_ids_share_a_direction_in_time() {
        let (c, n) = (5, 4);
        let a = DirectionSchedule::new(compute_id(1, 2, 3).unwrap());
        let b = DirectionSchedule::new(compute_id(3, 2, 1).unwrap());
        let bits = u64::from(bit_len(compute_id(3, 2, 1).unwrap().0));
        let limit = common_direction_round(bits, c, n);
        for agree in [true, false] {
            assert!(common_run_end(&a, &b, agree, c * n, limit).is_some());
        }
        for d in [LocalDir::Left, LocalDir::Right] {
            assert!(heading_run_end(&a, d, c * n, limit).is_some());
        }
    }
}
