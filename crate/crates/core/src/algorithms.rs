//! Exploration algorithms expressed as [`Machine`]s.
//!
//! Every machine is built once and shared; per-agent parameters live in
//! [`ProgramState`] registers.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::protocol::{
    Counter, DirExpr, Expr, Flow, Latch, Machine, Predicate, ProgramState, StateDef, StateName,
    Target,
};
use crate::ring::{Action, LocalDir, Snapshot, Synchrony, Transport};
use crate::symmetry::{self, DirectionSchedule};

use Counter::*;
use StateName::*;

/// Algorithm selection with its parameters, as it appears in configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmParams {
    KnownNWithChirality {
        #[serde(rename = "N")]
        bound: u64,
    },
    KnownNNoChirality {
        #[serde(rename = "N")]
        bound: u64,
    },
    PerpetualExploration,
    LandmarkWithChirality,
    StartFromLandmarkNoChirality,
    LandmarkNoChirality,
    PtBoundWithChirality {
        #[serde(rename = "N")]
        bound: u64,
    },
    PtLandmarkWithChirality,
    PtBoundNoChirality {
        #[serde(rename = "N")]
        bound: u64,
    },
    /// Configured with the exact ring size; uses `N = n - 1`.
    EtBoundNoChirality { n: u64 },
    EtPerpetualWithChirality,
}

impl AlgorithmParams {
    /// One instance of every algorithm, with size parameters set for a ring
    /// of `n` nodes.
    pub fn catalog(n: u64) -> Vec<AlgorithmParams> {
        use AlgorithmParams::*;
        vec![
            KnownNWithChirality { bound: n },
            KnownNNoChirality { bound: n },
            PerpetualExploration,
            LandmarkWithChirality,
            StartFromLandmarkNoChirality,
            LandmarkNoChirality,
            PtBoundWithChirality { bound: n },
            PtLandmarkWithChirality,
            PtBoundNoChirality { bound: n },
            EtBoundNoChirality { n },
            EtPerpetualWithChirality,
        ]
    }
}

/// Execution assumptions under which an algorithm is meant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Requirements {
    pub agents: usize,
    pub chirality: bool,
    pub landmark: bool,
    pub starts_at_landmark: bool,
    pub synchrony: Synchrony,
    pub transports: &'static [Transport],
    /// Expected to terminate (as opposed to exploring forever).
    pub terminating: bool,
}

const ANY_TRANSPORT: &[Transport] = &[Transport::Pt, Transport::Et, Transport::Ns];

impl AlgorithmParams {
    pub fn name(&self) -> &'static str {
        self.machine().name
    }

    pub fn machine(&self) -> &'static Machine {
        match self {
            Self::KnownNWithChirality { .. } => known_n_with_chirality(),
            Self::KnownNNoChirality { .. } => known_n_no_chirality(),
            Self::PerpetualExploration => perpetual_exploration(),
            Self::LandmarkWithChirality => landmark_with_chirality(),
            Self::StartFromLandmarkNoChirality => start_from_landmark_no_chirality(),
            Self::LandmarkNoChirality => landmark_no_chirality(),
            Self::PtBoundWithChirality { .. } => pt_bound_with_chirality(),
            Self::PtLandmarkWithChirality => pt_landmark_with_chirality(),
            Self::PtBoundNoChirality { .. } => pt_bound_no_chirality(),
            Self::EtBoundNoChirality { .. } => et_bound_no_chirality(),
            Self::EtPerpetualWithChirality => et_perpetual_with_chirality(),
        }
    }

    /// Value loaded into the `N` register.
    pub fn bound(&self) -> u64 {
        match *self {
            Self::KnownNWithChirality { bound }
            | Self::KnownNNoChirality { bound }
            | Self::PtBoundWithChirality { bound }
            | Self::PtBoundNoChirality { bound } => bound,
            Self::EtBoundNoChirality { n } => n.saturating_sub(1),
            _ => 0,
        }
    }

    pub fn requirements(&self) -> Requirements {
        let fsync = |chirality, landmark, terminating| Requirements {
            agents: 2,
            chirality,
            landmark,
            starts_at_landmark: false,
            synchrony: Synchrony::Fsync,
            transports: ANY_TRANSPORT,
            terminating,
        };
        let ssync = |agents, chirality, landmark, transport: &'static [Transport], terminating| {
            Requirements {
                agents,
                chirality,
                landmark,
                starts_at_landmark: false,
                synchrony: Synchrony::Ssync,
                transports: transport,
                terminating,
            }
        };
        match self {
            Self::KnownNWithChirality { .. } => fsync(true, false, true),
            Self::KnownNNoChirality { .. } => fsync(false, false, true),
            Self::PerpetualExploration => fsync(false, false, false),
            Self::LandmarkWithChirality => fsync(true, true, true),
            Self::StartFromLandmarkNoChirality => Requirements {
                starts_at_landmark: true,
                ..fsync(false, true, true)
            },
            Self::LandmarkNoChirality => fsync(false, true, true),
            Self::PtBoundWithChirality { .. } => ssync(2, true, false, &[Transport::Pt], true),
            Self::PtLandmarkWithChirality => ssync(2, true, true, &[Transport::Pt], true),
            Self::PtBoundNoChirality { .. } => ssync(3, false, false, &[Transport::Pt], true),
            Self::EtBoundNoChirality { .. } => ssync(3, false, false, &[Transport::Et], true),
            Self::EtPerpetualWithChirality => ssync(2, true, false, &[Transport::Et], false),
        }
    }

    /// A horizon comfortably beyond the algorithm's termination bound.
    pub fn default_horizon(&self, n: u64, fairness_window: u32) -> u64 {
        let w = u64::from(fairness_window.max(1));
        match *self {
            Self::KnownNWithChirality { bound } => 3 * bound + 1,
            Self::KnownNNoChirality { bound } => 5 * bound + 1,
            Self::PerpetualExploration => 10 * n,
            Self::LandmarkWithChirality => 20 * n,
            Self::StartFromLandmarkNoChirality | Self::LandmarkNoChirality => {
                landmark_no_chirality_bound(n) + 8 * n
            }
            Self::PtBoundWithChirality { bound } | Self::PtBoundNoChirality { bound } => {
                (40 * bound * bound + 40 * bound) * w
            }
            Self::PtLandmarkWithChirality => (40 * n * n + 40 * n) * w,
            Self::EtBoundNoChirality { n: size } => (40 * size * size + 40 * size) * w,
            Self::EtPerpetualWithChirality => 10 * n * w,
        }
    }
}

/// Termination round bound for the landmark algorithms without chirality.
pub fn landmark_no_chirality_bound(n: u64) -> u64 {
    symmetry::exploration_deadline(n) + 1 + 8 * n
}

/// Fresh program for one agent.
pub fn instantiate(params: &AlgorithmParams) -> ProgramState {
    ProgramState::new(params.machine(), params.bound())
}

fn build(cell: &'static OnceLock<Machine>, f: fn() -> Machine) -> &'static Machine {
    cell.get_or_init(f)
}

fn to(s: StateName) -> Target {
    Target::State(s)
}

const TERM: Target = Target::Terminate;

fn any(ps: Vec<Predicate>) -> Predicate {
    Predicate::Any(ps)
}

fn all(ps: Vec<Predicate>) -> Predicate {
    Predicate::All(ps)
}

fn not(p: Predicate) -> Predicate {
    Predicate::Not(Box::new(p))
}

pub fn known_n_with_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || Machine {
        name: "known_n_with_chirality",
        initial: Init,
        lexplore: false,
        states: vec![
            StateDef::new(
                Init,
                DirExpr::Left,
                vec![
                    (
                        any(vec![
                            Predicate::ge(Ttime, Expr::Bound(3)),
                            Predicate::ge(Tsteps, Expr::Bound(1)),
                        ]),
                        TERM,
                    ),
                    (Predicate::Catches, to(Bounce)),
                ],
            ),
            StateDef::new(
                Bounce,
                DirExpr::Right,
                vec![(Predicate::ge(Ttime, Expr::Bound(3)), TERM)],
            ),
        ],
    })
}

pub fn known_n_no_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let deadline = || (Predicate::ge(Ttime, Expr::Bound(5)), TERM);
        Machine {
            name: "known_n_no_chirality",
            initial: Init,
            lexplore: false,
            states: vec![
                StateDef::new(
                    Init,
                    DirExpr::Left,
                    vec![
                        deadline(),
                        (Predicate::eq(Btime, Expr::Bound(1)), to(Bounce)),
                        (Predicate::Catches, to(Bounce)),
                        (Predicate::Catched, to(Forward)),
                    ],
                ),
                StateDef::new(Bounce, DirExpr::Right, vec![deadline()]),
                StateDef::new(Forward, DirExpr::Left, vec![deadline()]),
            ],
        }
    })
}

pub fn perpetual_exploration() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let guards = || {
            vec![
                (Predicate::ge(Etime, Expr::Bound(2)), to(Reverse)),
                (Predicate::Catches, to(Bounce)),
                (Predicate::Catched, to(Forward)),
            ]
        };
        Machine {
            name: "perpetual_exploration",
            initial: Init,
            lexplore: false,
            states: vec![
                StateDef::new(Init, DirExpr::Dir, guards()).on_entry(|p, _| {
                    p.regs.bound = 2;
                    p.regs.dir = Some(LocalDir::Left);
                    Flow::Explore
                }),
                StateDef::new(Reverse, DirExpr::Dir, guards()).on_entry(|p, _| {
                    p.regs.bound *= 2;
                    p.regs.dir = Some(p.dir().opposite());
                    Flow::Explore
                }),
                StateDef::new(Bounce, DirExpr::OppDir, vec![]),
                StateDef::new(Forward, DirExpr::Dir, vec![]),
            ],
        }
    })
}

fn assign_role(p: &mut ProgramState, forward: bool) {
    if p.regs.forward_role.is_none() {
        p.regs.forward_role = Some(forward);
        p.regs.base = Some(p.heading);
        // The sweep starts with at most the Ntime an Init agent can hold, so
        // a handover from a long wait does not skip the termination handshake.
        if let Some(n) = p.regs.known_n {
            p.counters.ntime = p.counters.ntime.min(2 * n);
        }
    }
}

fn catch_guards() -> Vec<(Predicate, Target)> {
    vec![
        (Predicate::Catches, to(Bounce)),
        (Predicate::Catched, to(Forward)),
    ]
}

/// `Bounce`, `Return`, `Forward`, `BComm` and `FComm`: the coordinated
/// sweep run by both landmark algorithms once the agents caught each other.
fn catch_states() -> Vec<StateDef> {
    vec![
        StateDef::new(
            Bounce,
            DirExpr::OppBase,
            vec![
                (Predicate::Meeting, TERM),
                (
                    any(vec![
                        Predicate::EtimeAboveTwiceEsteps,
                        Predicate::gt(Ntime, Expr::Const(0)),
                    ]),
                    to(Return),
                ),
            ],
        )
        .on_entry(|p, _| {
            assign_role(p, false);
            Flow::Explore
        }),
        StateDef::new(
            Return,
            DirExpr::Base,
            vec![
                (
                    any(vec![Predicate::gt(Ntime, Expr::KnownN(3)), Predicate::Catched]),
                    TERM,
                ),
                (Predicate::Catches, to(BComm)),
            ],
        )
        .on_entry(|p, _| {
            p.regs.bounce_steps = p.counters.esteps;
            Flow::Explore
        }),
        StateDef::new(
            Forward,
            DirExpr::Base,
            vec![
                (
                    any(vec![
                        Predicate::gt(Ntime, Expr::KnownN(5)),
                        Predicate::Meeting,
                        Predicate::Catches,
                    ]),
                    TERM,
                ),
                (Predicate::Catched, to(FComm)),
            ],
        )
        .on_entry(|p, _| {
            assign_role(p, true);
            Flow::Explore
        }),
        StateDef::new(BComm, DirExpr::OppBase, vec![])
            .on_entry(|p, _| {
                p.regs.return_steps = p.counters.esteps;
                if p.regs.return_steps <= 2 * p.regs.bounce_steps {
                    p.regs.latch = Some(Latch::TerminateNext);
                    Flow::Act(Action::Move(p.base().opposite()))
                } else {
                    p.regs.latch = Some(Latch::BounceWait);
                    Flow::Act(Action::Stay)
                }
            })
            .on_resume(|_, s, latch| resume_wait(s, latch, Bounce)),
        StateDef::new(FComm, DirExpr::Base, vec![])
            .on_entry(|p, _| {
                if p.regs.known_n.is_some() {
                    p.regs.latch = Some(Latch::TerminateNext);
                    Flow::Act(Action::Move(p.base()))
                } else {
                    p.regs.latch = Some(Latch::ForwardWait);
                    Flow::Act(Action::Stay)
                }
            })
            .on_resume(|_, s, latch| resume_wait(s, latch, Forward)),
    ]
}

fn resume_wait(s: &Snapshot, latch: Latch, back_to: StateName) -> Flow {
    match latch {
        Latch::BounceWait | Latch::ForwardWait if s.other_in_interior() => Flow::Goto(back_to),
        _ => Flow::Terminate,
    }
}

pub fn landmark_with_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let mut states = vec![StateDef::new(
            Init,
            DirExpr::Left,
            vec![
                (Predicate::gt(Ntime, Expr::KnownN(2)), TERM),
                (Predicate::Catches, to(Bounce)),
                (Predicate::Catched, to(Forward)),
            ],
        )];
        states.extend(catch_states());
        Machine {
            name: "landmark_with_chirality",
            initial: Init,
            lexplore: true,
            states,
        }
    })
}

fn reset_registers(p: &mut ProgramState) -> Flow {
    p.regs.dir = Some(LocalDir::Left);
    p.regs.r1 = 0;
    p.regs.r2 = 0;
    p.regs.r3 = 0;
    Flow::Explore
}

fn blocked() -> Predicate {
    Predicate::ge(Btime, Expr::Const(1))
}

/// Every state of the start-from-landmark algorithm except its `InitL`.
fn symmetry_breaking_states(at_landmark: StateName) -> Vec<StateDef> {
    let happy = || (Predicate::KnownN, to(Happy));
    let with_catches = |mut head: Vec<(Predicate, Target)>| {
        head.extend(catch_guards());
        head
    };
    let mut states = vec![
        StateDef::new(
            Happy,
            DirExpr::Dir,
            with_catches(vec![(Predicate::ge(Ttime, Expr::Deadline(1)), TERM)]),
        ),
        StateDef::new(
            FirstBlockL,
            DirExpr::Dir,
            with_catches(vec![
                happy(),
                (Predicate::ArrivedAtLandmark, to(at_landmark)),
                (blocked(), to(Ready)),
            ]),
        )
        .on_entry(|p, _| {
            p.regs.dir = Some(LocalDir::Right);
            p.regs.r1 = p.counters.ttime;
            Flow::Explore
        }),
        StateDef::new(
            AtLandmarkL,
            DirExpr::Dir,
            with_catches(vec![happy(), (blocked(), to(Ready))]),
        )
        .on_entry(|p, s| {
            p.regs.r3 = p.counters.etime;
            if s.others_present() {
                p.regs.latch = Some(Latch::LandmarkWait);
                Flow::Act(Action::Stay)
            } else {
                Flow::Explore
            }
        })
        .on_resume(|_, s, _| {
            if s.others_present() {
                Flow::Terminate
            } else {
                Flow::Explore
            }
        }),
        StateDef::new(Ready, DirExpr::Dir, vec![]).on_entry(|p, _| {
            let r = &mut p.regs;
            r.r2 = p.counters.ttime.saturating_sub(r.r1.max(r.r3));
            // Registers are round counts; overflow would need ~2^42 rounds.
            let id = symmetry::compute_id(r.r1, r.r2, r.r3).unwrap_or(symmetry::AgentId(0));
            r.id = Some(id);
            r.schedule = Some(DirectionSchedule::new(id));
            Flow::Goto(Reverse)
        }),
        StateDef::new(
            Reverse,
            DirExpr::Dir,
            with_catches(vec![
                (
                    all(vec![Predicate::ReverseFixed, Predicate::ge(Ttime, Expr::Deadline(0))]),
                    TERM,
                ),
                (all(vec![not(Predicate::ReverseFixed), Predicate::Switch]), to(Reverse)),
            ]),
        )
        .on_entry(|p, _| {
            let t = p.counters.ttime;
            p.regs.dir = Some(
                p.regs
                    .schedule
                    .as_ref()
                    .map_or(LocalDir::Left, |s| s.direction(t)),
            );
            p.regs.reverse_fixed = p.regs.known_n.is_some();
            Flow::Explore
        }),
    ];
    states.extend(catch_states());
    states
}

fn init_l() -> StateDef {
    StateDef::new(
        InitL,
        DirExpr::Dir,
        vec![
            (Predicate::KnownN, to(Happy)),
            (blocked(), to(FirstBlockL)),
            (Predicate::Catches, to(Bounce)),
            (Predicate::Catched, to(Forward)),
        ],
    )
    .on_entry(|p, _| reset_registers(p))
}

pub fn start_from_landmark_no_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let mut states = vec![init_l()];
        states.extend(symmetry_breaking_states(AtLandmarkL));
        Machine {
            name: "start_from_landmark_no_chirality",
            initial: InitL,
            lexplore: true,
            states,
        }
    })
}

pub fn landmark_no_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let mut states = vec![
            StateDef::new(
                Init,
                DirExpr::Dir,
                vec![
                    (Predicate::KnownN, to(Happy)),
                    (blocked(), to(FirstBlock)),
                    (Predicate::Catches, to(Bounce)),
                    (Predicate::Catched, to(Forward)),
                ],
            )
            .on_entry(|p, _| reset_registers(p)),
            StateDef::new(
                FirstBlock,
                DirExpr::Dir,
                vec![
                    (Predicate::KnownN, to(Happy)),
                    (Predicate::ArrivedAtLandmark, to(AtLandmark)),
                    (blocked(), to(Ready)),
                    (Predicate::Catches, to(Bounce)),
                    (Predicate::Catched, to(Forward)),
                ],
            )
            .on_entry(|p, _| {
                p.regs.dir = Some(LocalDir::Right);
                p.regs.r1 = p.counters.ttime;
                Flow::Explore
            }),
            StateDef::new(
                AtLandmark,
                DirExpr::Dir,
                vec![
                    (Predicate::KnownN, to(Happy)),
                    (blocked(), to(Ready)),
                    (Predicate::Catches, to(Bounce)),
                    (Predicate::Catched, to(Forward)),
                ],
            )
            .on_entry(|p, s| {
                if s.others_present() {
                    p.counters.ttime = 0;
                    Flow::Goto(InitL)
                } else {
                    p.regs.r3 = p.counters.etime;
                    Flow::Explore
                }
            }),
            init_l(),
        ];
        states.extend(symmetry_breaking_states(AtLandmarkL));
        Machine {
            name: "landmark_no_chirality",
            initial: Init,
            lexplore: true,
            states,
        }
    })
}

fn pt_bounce_check(p: &mut ProgramState, with_bound: bool) -> Flow {
    let r = &mut p.regs;
    if r.t_sl == 0 {
        r.t_sl = p.counters.esteps;
        return Flow::Explore;
    }
    r.left_steps = p.counters.esteps;
    if r.right_steps >= r.left_steps {
        return Flow::Terminate;
    }
    r.t_sl += r.left_steps - r.right_steps;
    if with_bound && r.t_sl >= r.bound {
        return Flow::Terminate;
    }
    Flow::Explore
}

pub fn pt_bound_with_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let far = || (Predicate::ge(Esteps, Expr::Bound(1)), TERM);
        Machine {
            name: "pt_bound_with_chirality",
            initial: Init,
            lexplore: false,
            states: vec![
                StateDef::new(Init, DirExpr::Left, vec![far(), (Predicate::Catches, to(Bounce))]),
                StateDef::new(
                    Bounce,
                    DirExpr::Right,
                    vec![far(), (Predicate::gt(Btime, Expr::Const(0)), to(Reverse))],
                )
                .on_entry(|p, _| pt_bounce_check(p, true)),
                StateDef::new(Reverse, DirExpr::Left, vec![far(), (Predicate::Catches, to(Bounce))])
                    .on_entry(|p, _| {
                        p.regs.right_steps = p.counters.esteps;
                        Flow::Explore
                    }),
            ],
        }
    })
}

/// Bounded variant where the size bound is replaced by the landmark: an
/// agent stops as soon as it has walked once around the ring.
pub fn pt_landmark_with_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || {
        let looped = || (Predicate::KnownN, TERM);
        Machine {
            name: "pt_landmark_with_chirality",
            initial: Init,
            lexplore: true,
            states: vec![
                StateDef::new(Init, DirExpr::Left, vec![looped(), (Predicate::Catches, to(Bounce))]),
                StateDef::new(
                    Bounce,
                    DirExpr::Right,
                    vec![looped(), (Predicate::gt(Btime, Expr::Const(0)), to(Reverse))],
                )
                .on_entry(|p, _| pt_bounce_check(p, false)),
                StateDef::new(
                    Reverse,
                    DirExpr::Left,
                    vec![looped(), (Predicate::Catches, to(Bounce))],
                )
                .on_entry(|p, _| {
                    p.regs.right_steps = p.counters.esteps;
                    Flow::Explore
                }),
            ],
        }
    })
}

/// The crossing-length check: terminate when the last crossing was not
/// longer (or, when `strict`, shorter) than the one before it.
fn check_d(p: &mut ProgramState, strict: bool) -> Flow {
    let r = &mut p.regs;
    let e = p.counters.esteps;
    if r.d > 0 {
        let stop = if strict { e < r.d } else { e <= r.d };
        if stop {
            return Flow::Terminate;
        }
        r.d = e;
    }
    Flow::Explore
}

fn three_agent_machine(name: &'static str, strict: bool) -> Machine {
    let far = || (Predicate::ge(Esteps, Expr::Bound(1)), TERM);
    let check: fn(&mut ProgramState, &Snapshot) -> Flow = if strict {
        |p, _| check_d(p, true)
    } else {
        |p, _| check_d(p, false)
    };
    let reverse_entry: fn(&mut ProgramState, &Snapshot) -> Flow = if strict {
        |p, _| {
            if p.regs.d == 0 {
                p.regs.d = p.counters.esteps;
                Flow::Explore
            } else {
                check_d(p, true)
            }
        }
    } else {
        |p, _| {
            if p.regs.d == 0 {
                p.regs.d = p.counters.esteps;
                Flow::Explore
            } else {
                check_d(p, false)
            }
        }
    };
    Machine {
        name,
        initial: Init,
        lexplore: false,
        states: vec![
            StateDef::new(Init, DirExpr::Left, vec![far(), (Predicate::Catches, to(Bounce))]),
            StateDef::new(
                Bounce,
                DirExpr::Right,
                vec![
                    far(),
                    (Predicate::Meeting, to(MeetingB)),
                    (Predicate::Catches, to(Reverse)),
                ],
            )
            .on_entry(check),
            StateDef::new(
                Reverse,
                DirExpr::Left,
                vec![
                    far(),
                    (Predicate::Meeting, to(MeetingR)),
                    (Predicate::Catches, to(Bounce)),
                ],
            )
            .on_entry(reverse_entry),
            StateDef::new(
                MeetingR,
                DirExpr::Left,
                vec![far(), (Predicate::Catches, to(Bounce))],
            )
            .on_entry(check)
            .keep_epoch(),
            StateDef::new(
                MeetingB,
                DirExpr::Right,
                vec![far(), (Predicate::Catches, to(Reverse))],
            )
            .on_entry(check)
            .keep_epoch(),
        ],
    }
}

pub fn pt_bound_no_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || three_agent_machine("pt_bound_no_chirality", false))
}

pub fn et_bound_no_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || three_agent_machine("et_bound_no_chirality", true))
}

pub fn et_perpetual_with_chirality() -> &'static Machine {
    static CELL: OnceLock<Machine> = OnceLock::new();
    build(&CELL, || Machine {
        name: "et_perpetual_with_chirality",
        initial: Init,
        lexplore: false,
        states: vec![
            StateDef::new(Init, DirExpr::Left, vec![(Predicate::Catches, to(Bounce))]),
            StateDef::new(Bounce, DirExpr::Right, vec![]),
        ],
    })
}

/// Every machine, for structural checks.
pub fn all_machines() -> Vec<&'static Machine> {
    vec![
        known_n_with_chirality(),
        known_n_no_chirality(),
        perpetual_exploration(),
        landmark_with_chirality(),
        start_from_landmark_no_chirality(),
        landmark_no_chirality(),
        pt_bound_with_chirality(),
        pt_landmark_with_chirality(),
        pt_bound_no_chirality(),
        et_bound_no_chirality(),
        et_perpetual_with_chirality(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{protocol_step, Target};
    use crate::ring::{Observed, SeenPos};

    fn interior(moved: bool) -> Snapshot {
        Snapshot {
            my_pos: None,
            is_landmark: false,
            others: vec![],
            my_moved: moved,
        }
    }

    #[test]
    fn every_guard_target_exists() {
        for m in all_machines() {
            assert!(m.state(m.initial).is_ok(), "{}", m.name);
            for s in &m.states {
                for g in &s.explore.guards {
                    if let Target::State(t) = g.then {
                        assert!(m.state(t).is_ok(), "{}: {:?} -> {:?}", m.name, s.name, t);
                    }
                }
            }
        }
    }

    #[test]
    fn known_n_with_chirality_stops_after_n_steps() {
        let mut p = instantiate(&AlgorithmParams::KnownNWithChirality { bound: 3 });
        let a = protocol_step(&mut p, &interior(false)).unwrap();
        assert_eq!(a.action, Action::Move(LocalDir::Left));
        for _ in 0..2 {
            let a = protocol_step(&mut p, &interior(true)).unwrap();
            assert_eq!(a.action, Action::Move(LocalDir::Left));
        }
        let a = protocol_step(&mut p, &interior(true)).unwrap();
        assert_eq!(a.action, Action::Terminate);
        assert_eq!(p.counters.tsteps, 3);
    }

    #[test]
    fn catching_sends_to_bounce() {
        let mut p = instantiate(&AlgorithmParams::KnownNWithChirality { bound: 10 });
        protocol_step(&mut p, &interior(false)).unwrap();
        let mut s = interior(true);
        s.others.push(Observed {
            pos: SeenPos::Left,
            moved: false,
        });
        let a = protocol_step(&mut p, &s).unwrap();
        assert_eq!(p.state, Bounce);
        assert_eq!(a.action, Action::Move(LocalDir::Right));
        assert!(a.flags.catches);
    }

    #[test]
    fn perpetual_doubles_and_reverses() {
        let mut p = instantiate(&AlgorithmParams::PerpetualExploration);
        protocol_step(&mut p, &interior(false)).unwrap();
        assert_eq!(p.regs.bound, 2);
        let mut dirs = vec![];
        for _ in 0..12 {
            let a = protocol_step(&mut p, &interior(true)).unwrap();
            dirs.push(a.action);
        }
        // Etime reaches 2N = 4 at the fourth activation; then N = 4.
        assert_eq!(dirs[2], Action::Move(LocalDir::Left));
        assert_eq!(dirs[3], Action::Move(LocalDir::Right));
        assert_eq!(p.regs.bound, 8);
    }

    #[test]
    fn reverse_loop_is_broken_within_one_activation() {
        let mut p = instantiate(&AlgorithmParams::StartFromLandmarkNoChirality);
        protocol_step(&mut p, &interior(false)).unwrap();
        // Force straight into Ready.
        p.regs.r1 = 1;
        p.state = FirstBlockL;
        p.counters.btime = 0;
        p.last_action = Some(Action::Move(LocalDir::Right));
        let mut s = interior(false);
        s.my_pos = Some(LocalDir::Right);
        for _ in 0..40 {
            protocol_step(&mut p, &s).unwrap();
        }
        assert!(p.regs.id.is_some());
        assert_eq!(p.state, Reverse);
    }

    #[test]
    fn et_bound_uses_n_minus_one() {
        assert_eq!(AlgorithmParams::EtBoundNoChirality { n: 6 }.bound(), 5);
    }

    #[test]
    fn params_serde_roundtrip() {
        let p: AlgorithmParams =
            serde_json::from_str(r#"{"name":"known_n_with_chirality","N":5}"#).unwrap();
        assert_eq!(p, AlgorithmParams::KnownNWithChirality { bound: 5 });
        let p: AlgorithmParams = serde_json::from_str(r#"{"name":"landmark_no_chirality"}"#).unwrap();
        assert_eq!(p.name(), "landmark_no_chirality");
        assert!(serde_json::from_str::<AlgorithmParams>(r#"{"name":"nope"}"#).is_err());
    }
}
