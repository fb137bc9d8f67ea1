//! JSONL traces and the run digest.
//!
//! A trace file starts with one header line (the config and the digest),
//! followed by one [`TraceRecord`] per round. The digest is SHA-256 over a
//! fixed binary encoding of the records, so it does not depend on JSON
//! formatting and is computed identically whether or not a trace is kept.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, HarnessError};
use crate::protocol::{ProgramState, StateName};
use crate::ring::{
    AdversaryDecision, AgentIndex, AgentStatus, Configuration, EdgeId, Event, NodeId, Slot,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub node: NodeId,
    pub slot: Slot,
    pub status: AgentStatus,
    pub moved: bool,
    pub state: StateName,
    pub ttime: u64,
    pub tsteps: u64,
    pub etime: u64,
    pub esteps: u64,
    pub btime: u64,
}

/// State at the end of one round plus the decision that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: u64,
    pub missing: Vec<EdgeId>,
    pub active: Vec<AgentIndex>,
    pub tie_break: Vec<AgentIndex>,
    pub agents: Vec<AgentRecord>,
    pub events: Vec<Event>,
}

impl TraceRecord {
    pub fn capture(
        round: u64,
        decision: &AdversaryDecision,
        config: &Configuration,
        programs: &[ProgramState],
        events: Vec<Event>,
    ) -> Self {
        let agents = config
            .agents
            .iter()
            .zip(programs)
            .map(|(a, p)| AgentRecord {
                node: a.node,
                slot: a.slot,
                status: a.status,
                moved: a.moved,
                state: p.state,
                ttime: p.counters.ttime,
                tsteps: p.counters.tsteps,
                etime: p.counters.etime,
                esteps: p.counters.esteps,
                btime: p.counters.btime,
            })
            .collect();
        Self {
            round,
            missing: decision.missing.clone(),
            active: decision.active.clone(),
            tie_break: decision.tie_break.clone(),
            agents,
            events,
        }
    }

    pub fn decision(&self) -> AdversaryDecision {
        AdversaryDecision {
            missing: self.missing.clone(),
            active: self.active.clone(),
            tie_break: self.tie_break.clone(),
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        let u = |x: u64, out: &mut Vec<u8>| out.extend_from_slice(&x.to_le_bytes());
        u(self.round, out);
        for list in [&self.missing, &self.active, &self.tie_break] {
            u(list.len() as u64, out);
            for &x in list.iter() {
                u(x as u64, out);
            }
        }
        u(self.agents.len() as u64, out);
        for a in &self.agents {
            u(a.node as u64, out);
            out.push(a.slot as u8);
            out.push(a.status as u8);
            out.push(u8::from(a.moved));
            out.push(a.state as u8);
            for c in [a.ttime, a.tsteps, a.etime, a.esteps, a.btime] {
                u(c, out);
            }
        }
        u(self.events.len() as u64, out);
        for e in &self.events {
            let fields: (u8, [usize; 4]) = match *e {
                Event::Moved { agent, from, to, edge } => (0, [agent, from, to, edge]),
                Event::Blocked { agent, node, edge } => (1, [agent, node, edge, 0]),
                Event::PortDenied { agent, node } => (2, [agent, node, 0, 0]),
                Event::PassiveTransport { agent, from, to, edge } => (3, [agent, from, to, edge]),
                Event::Terminated { agent, node } => (4, [agent, node, 0, 0]),
                Event::Meeting { agent } => (5, [agent, 0, 0, 0]),
                Event::Catches { agent } => (6, [agent, 0, 0, 0]),
                Event::Catched { agent } => (7, [agent, 0, 0, 0]),
            };
            out.push(fields.0);
            for x in fields.1 {
                u(x as u64, out);
            }
        }
    }
}

/// Incremental digest over trace records.
#[derive(Clone, Default)]
pub struct RoundDigest {
    hasher: Sha256,
    buf: Vec<u8>,
}

impl RoundDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn absorb(&mut self, record: &TraceRecord) {
        self.buf.clear();
        record.encode(&mut self.buf);
        self.hasher.update(&self.buf);
    }

    pub fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }

    pub fn of(records: &[TraceRecord]) -> String {
        let mut d = Self::new();
        for r in records {
            d.absorb(r);
        }
        d.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub config: ExperimentConfig,
    pub rounds: u64,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

pub fn write_trace(path: &Path, header: &TraceHeader, records: &[TraceRecord]) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let line = |e: serde_json::Error| HarnessError::Parse {
        line: 0,
        message: e.to_string(),
    };
    serde_json::to_writer(&mut w, header).map_err(line)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<TraceFile, HarnessError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |e: serde_json::Error| HarnessError::Parse {
            line: lineno,
            message: e.to_string(),
        };
        if header.is_none() {
            header = Some(serde_json::from_str::<TraceHeader>(&line).map_err(err)?);
        } else {
            records.push(serde_json::from_str::<TraceRecord>(&line).map_err(err)?);
        }
    }
    let header = header.ok_or(HarnessError::Parse {
        line: 1,
        message: "missing trace header".into(),
    })?;
    Ok(TraceFile { header, records })
}
