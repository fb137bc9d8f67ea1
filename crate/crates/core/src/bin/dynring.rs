//! Command-line front end. Exit codes: 0 success, 1 property or bound
//! violation, 2 configuration or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dynring::harness::{
    campaign, exhaustive_verify, replay, run_with, write_csv, write_trace, CampaignSpec,
    ExperimentConfig, FieldError, HarnessError, RunOptions, TraceHeader,
};

#[derive(Parser)]
#[command(name = "dynring", about = "Exploration of dynamic rings by mobile agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment with the adversary named in the config.
    Run {
        config: PathBuf,
        /// Write a JSONL trace to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Enumerate every FSYNC edge-removal schedule up to the horizon.
    Verify {
        config: PathBuf,
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u128,
    },
    /// Run seeded trials from a config template and write one CSV row each.
    Campaign {
        config: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
        /// Draw start nodes per trial instead of using the config's.
        #[arg(long)]
        random_starts: bool,
        /// Draw orientations per trial.
        #[arg(long)]
        random_orientations: bool,
    },
    /// Re-execute a trace and compare it round by round.
    Replay { trace: PathBuf },
}

enum Failure {
    Violation(String),
    Input(HarnessError),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Input(e)
    }
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Failure> {
    let c = ExperimentConfig::load(path)?;
    c.validate()?;
    Ok(c)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize")
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { config, trace, seed } => {
            let mut c = load(&config)?;
            if let Some(s) = seed {
                c.seed = s;
            }
            let mut strategy = c.adversary.build(c.seed);
            let opts = RunOptions { trace: trace.is_some(), frames: false };
            let art = run_with(&c, strategy.as_mut(), &opts)?;
            if let Some(path) = trace {
                let header = TraceHeader {
                    config: c.clone(),
                    rounds: art.result.rounds,
                    digest: art.result.trace_digest.clone(),
                };
                write_trace(&path, &header, &art.trace)?;
            }
            println!("{}", json(&art.result));
            if !art.result.violations.is_empty() {
                return Err(Failure::Violation(format!(
                    "{} violation(s), first: {}",
                    art.result.violations.len(),
                    art.result.violations[0].label()
                )));
            }
            Ok(())
        }
        Command::Verify { config, horizon, budget } => {
            let c = load(&config)?;
            let report = exhaustive_verify(&c, horizon, budget)?;
            println!("{}", json(&report));
            if !report.sound() {
                return Err(Failure::Violation(format!(
                    "{} unsound schedule(s), {} invariant failure(s)",
                    report.unsound, report.invariant_failures
                )));
            }
            if c.algorithm.requirements().terminating && !report.all_terminated() {
                return Err(Failure::Violation(format!(
                    "{} schedule(s) without termination by round {horizon}",
                    report.unterminated
                )));
            }
            Ok(())
        }
        Command::Campaign { config, trials, out, random_starts, random_orientations } => {
            let c = load(&config)?;
            if trials == 0 {
                return Err(Failure::Input(HarnessError::Config(vec![FieldError {
                    field: "trials".into(),
                    message: "must be at least 1".into(),
                }])));
            }
            let mut spec = CampaignSpec::new(c, trials);
            if random_starts {
                spec = spec.random_starts(true);
            }
            if random_orientations {
                spec = spec.random_orientations();
            }
            let summary = campaign(&spec)?;
            write_csv(&summary.rows, &out)?;
            let max_explored = summary.results.iter().filter_map(|r| r.explored_round).max();
            let terminated = summary.results.iter().filter(|r| r.any_terminated()).count();
            println!(
                "{}",
                json(&serde_json::json!({
                    "trials": trials,
                    "violating_runs": summary.violating_runs(),
                    "runs_with_termination": terminated,
                    "max_explored_round": max_explored,
                    "max_total_moves": summary.max_total_moves(),
                    "mean_total_moves": summary.mean_total_moves(),
                }))
            );
            if summary.violating_runs() > 0 {
                return Err(Failure::Violation(format!(
                    "{} violating run(s)",
                    summary.violating_runs()
                )));
            }
            Ok(())
        }
        Command::Replay { trace } => {
            let report = replay(&trace)?;
            println!("{}", json(&report));
            if let Some(r) = report.first_divergence {
                return Err(Failure::Violation(format!("diverged at round {r}")));
            }
            if !report.matches() {
                return Err(Failure::Violation("digest mismatch".into()));
            }
            if let Some(v) = report.result.violations.first() {
                return Err(Failure::Violation(format!(
                    "invalid recorded round {}: {}",
                    v.round(),
                    v.label()
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
