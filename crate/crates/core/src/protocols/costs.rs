use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{TranscriptEntry, World};
use crate::functionality::EventRecord;

/// PUF resources consumed by one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub pufs_created: usize,
    /// Maximal runs of handover/ready/received events not interrupted by
    /// any PUF evaluation, creation or protocol message.
    pub exchange_phases: usize,
}

pub fn cost_report(w: &World) -> CostReport {
    cost_from_log(w.func().log(), w.transcript())
}

pub fn cost_from_log(log: &[EventRecord], transcript: &[TranscriptEntry]) -> CostReport {
    let breaks: BTreeSet<usize> = transcript.iter().map(|t| t.at_event).collect();
    let mut report = CostReport::default();
    let mut in_phase = false;
    for (i, e) in log.iter().enumerate() {
        if breaks.contains(&i) {
            in_phase = false;
        }
        if !e.handled {
            continue;
        }
        if e.kind.starts_with("init") {
            report.pufs_created += 1;
        }
        if e.is_transfer() {
            if !in_phase {
                report.exchange_phases += 1;
                in_phase = true;
            }
        } else {
            in_phase = false;
        }
    }
    report
}

/// Counters summed over the trials of an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resources {
    pub pufs_created: u64,
    pub exchange_phases: u64,
    /// Answered or refused evaluation requests.
    pub queries: u64,
    /// Bits of protocol messages, PUF transfers excluded.
    pub comm_bits: u64,
}

impl Resources {
    pub fn of(w: &World) -> Self {
        let cost = cost_report(w);
        Self {
            pufs_created: cost.pufs_created as u64,
            exchange_phases: cost.exchange_phases as u64,
            queries: w.func().log().iter().filter(|e| e.kind == "eval").count() as u64,
            comm_bits: w.transcript().iter().map(|t| t.bits as u64).sum(),
        }
    }

    pub fn add(&mut self, other: &Self) {
        self.pufs_created += other.pufs_created;
        self.exchange_phases += other.exchange_phases;
        self.queries += other.queries;
        self.comm_bits += other.comm_bits;
    }
}
