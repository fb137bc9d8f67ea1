//! Deterministic simulation and verification of mobile agents exploring a
//! 1-interval-connected dynamic ring: a ring in which an adversary may
//! remove at most one edge per round.
//!
//! The crate is organised bottom-up:
//!
//! - [`ring`]: topology, agent placement, snapshots and the round engine.
//! - [`protocol`]: counters, guarded `Explore` states and the interpreter.
//! - [`symmetry`]: identifiers and the reversal schedule that breaks symmetry.
//! - [`algorithms`]: the exploration algorithms as state machines.
//! - [`adversary`]: strategies choosing missing edges and activations.
//! - [`harness`]: runs, exhaustive verification, campaigns, traces, replay.
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --release --example known_bound
//! cargo run --release --example exhaustive
//! cargo run --release --example perpetual
//! cargo run --release --example landmark
//! cargo run --release --example symmetry_schedule
//! cargo run --release --example pt_campaign
//! cargo run --release --example et_confuser
//! cargo run --release --example impossibility
//! cargo run --release --example trace_replay
//! ```
//!
//! The `dynring` binary exposes `run`, `verify`, `campaign` and `replay`
//! over JSON config files.

pub mod adversary;
pub mod algorithms;
pub mod harness;
pub mod protocol;
pub mod ring;
pub mod symmetry;
