//! Ideal functionalities: the PUF functionality (with or without creator
//! communication) and ideal bit commitment.

mod fcom;
mod puf_func;
mod types;

use std::collections::BTreeMap;

use thiserror::Error;

pub use fcom::{FCom, FComDelivery, FComMsg};
pub use puf_func::PufFunctionality;
pub use types::*;

use crate::bitlab::BitString;
use crate::pufmodel::PufError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncError {
    #[error("MALFORMED: {0}")]
    Malformed(String),
    #[error(transparent)]
    Puf(PufError),
}

/// Replays an event log and checks the ownership and budget invariants:
/// handled evaluations come from the owner (or the adversary during transit),
/// every PUF is owned or in transit, creator traffic stays within budget and
/// only reaches the creator.
pub fn audit_log(log: &[EventRecord], budget: &CommBudget) -> Result<(), String> {
    #[derive(Default)]
    struct State {
        owner: Option<String>,
        transit: Option<String>,
        creator: String,
        malicious: bool,
        in_bits: usize,
        out_bits: usize,
    }
    let mut pufs: BTreeMap<u64, State> = BTreeMap::new();
    for ev in log.iter().filter(|e| e.handled) {
        let at = ev.step;
        match ev.kind.as_str() {
            "init-honest" | "init-malicious" => {
                if pufs.contains_key(&ev.sid) {
                    return Err(format!("step {at}: sid {} initialised twice", ev.sid));
                }
                pufs.insert(
                    ev.sid,
                    State {
                        owner: Some(ev.sender.clone()),
                        creator: ev.sender.clone(),
                        malicious: ev.kind == "init-malicious",
                        ..Default::default()
                    },
                );
            }
            kind => {
                let s = pufs.get_mut(&ev.sid).ok_or_else(|| format!("step {at}: {kind} on unknown sid {}", ev.sid))?;
                match kind {
                    "eval" => {
                        let by_owner = s.owner.as_deref() == Some(ev.sender.as_str());
                        let by_adv_in_transit = ev.sender == "Adv" && s.transit.is_some();
                        if !(by_owner || by_adv_in_transit) {
                            return Err(format!("step {at}: {} evaluated sid {} without access", ev.sender, ev.sid));
                        }
                    }
                    "inmsg" => {
                        if !s.malicious || s.creator != ev.sender {
                            return Err(format!("step {at}: inmsg accepted from a non-creator"));
                        }
                        s.in_bits += payload_len(&ev.payload_hex)?;
                    }
                    "handover" => {
                        if s.owner.as_deref() != Some(ev.sender.as_str()) {
                            return Err(format!("step {at}: handover by non-owner"));
                        }
                        s.owner = None;
                        s.transit = ev.target.clone();
                    }
                    "ready" => {
                        s.owner = Some(s.transit.take().ok_or_else(|| format!("step {at}: ready without transit"))?);
                    }
                    "received" => {}
                    other => return Err(format!("step {at}: unknown event kind {other}")),
                }
                for d in ev.deliveries.iter().filter(|d| d.kind == "outmsg") {
                    if d.to != s.creator {
                        return Err(format!("step {at}: outgoing message delivered to {} instead of creator", d.to));
                    }
                    s.out_bits += payload_len(&d.payload_hex)?;
                }
                if budget.k_in.is_some_and(|k| s.in_bits > k) {
                    return Err(format!("step {at}: k_in exceeded on sid {}", ev.sid));
                }
                if budget.k_out.is_some_and(|k| s.out_bits > k) {
                    return Err(format!("step {at}: k_out exceeded on sid {}", ev.sid));
                }
            }
        }
        for (sid, s) in &pufs {
            if s.owner.is_some() == s.transit.is_some() {
                return Err(format!("step {at}: sid {sid} is not exactly one of owned / in transit"));
            }
        }
    }
    Ok(())
}

fn payload_len(hex: &str) -> Result<usize, String> {
    BitString::from_hex(hex).map(|b| b.len()).map_err(|e| e.to_string())
}
