use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::types::*;
use super::FuncError;
use crate::bitlab::BitString;
use crate::pufmodel::{sample_puf, MachineInput, MaliciousPufMachine, PufInstance, PufParams};

#[derive(Clone, Debug)]
struct PufEntry {
    mode: Mode,
    creator: Party,
    honest: Option<PufInstance>,
    machine: Option<MaliciousPufMachine>,
    owner: Option<Party>,
    /// `(from, to)` while a handover is pending.
    transit: Option<(Party, Party)>,
    in_used: usize,
    out_used: usize,
}

/// PUF functionality with optional creator communication for malicious PUFs.
///
/// Messages that do not meet their preconditions are dropped and logged
/// (`handled = false`); only structurally invalid messages return an error.
#[derive(Debug)]
pub struct PufFunctionality {
    config: FuncConfig,
    rng: ChaCha20Rng,
    pufs: BTreeMap<Sid, PufEntry>,
    received: BTreeSet<(Sid, Party)>,
    log: Vec<EventRecord>,
    tap: Vec<TapRecord>,
    step: u64,
}

impl PufFunctionality {
    pub fn new(config: FuncConfig, seed: u64) -> Self {
        Self {
            config,
            rng: ChaCha20Rng::seed_from_u64(seed),
            pufs: BTreeMap::new(),
            received: BTreeSet::new(),
            log: Vec::new(),
            tap: Vec::new(),
            step: 0,
        }
    }

    pub fn config(&self) -> &FuncConfig {
        &self.config
    }

    pub fn log(&self) -> &[EventRecord] {
        &self.log
    }

    /// Honest-PUF evaluations, in order.
    pub fn tap(&self) -> &[TapRecord] {
        &self.tap
    }

    pub fn owner(&self, sid: Sid) -> Option<Party> {
        self.pufs.get(&sid).and_then(|e| e.owner)
    }

    pub fn in_transit(&self, sid: Sid) -> Option<(Party, Party)> {
        self.pufs.get(&sid).and_then(|e| e.transit)
    }

    pub fn mode(&self, sid: Sid) -> Option<Mode> {
        self.pufs.get(&sid).map(|e| e.mode)
    }

    pub fn family(&self, sid: Sid) -> Option<&PufParams> {
        self.pufs.get(&sid).and_then(|e| e.honest.as_ref().map(PufInstance::params))
    }

    pub fn sids(&self) -> impl Iterator<Item = Sid> + '_ {
        self.pufs.keys().copied()
    }

    /// Line-delimited JSON rendering of the event log.
    pub fn log_jsonl(&self) -> String {
        self.log.iter().map(|r| serde_json::to_string(r).expect("event record serialises") + "\n").collect()
    }

    pub fn handle(&mut self, msg: FuncMsg) -> Result<Vec<Delivery>, FuncError> {
        self.step += 1;
        let step = self.step;
        let (payload_hex, target) = match &msg {
            FuncMsg::InitHonest { .. } => (String::new(), None),
            FuncMsg::InitMalicious { program, .. } => (program.name().to_string(), None),
            FuncMsg::Eval { challenge, .. } => (challenge.to_hex(), None),
            FuncMsg::InMsg { payload, .. } => (payload.to_hex(), None),
            FuncMsg::Handover { to, .. } => (String::new(), Some(to.to_string())),
            FuncMsg::Ready { .. } => (String::new(), None),
            FuncMsg::Received { pi, .. } => (String::new(), Some(pi.to_string())),
        };
        let mut record = EventRecord {
            step,
            sid: msg.sid().0,
            kind: msg.kind().into(),
            sender: msg.from().to_string(),
            target,
            payload_hex,
            handled: true,
            deliveries: Vec::new(),
            note: None,
        };
        let result = self.dispatch(msg, &mut record);
        match &result {
            Ok(Some(deliveries)) => record.deliveries = deliveries.iter().map(Delivery::record).collect(),
            Ok(None) => record.handled = false,
            Err(e) => {
                record.handled = false;
                record.note = Some(e.to_string());
            }
        }
        self.log.push(record);
        result.map(Option::unwrap_or_default)
    }

    /// `Ok(None)` is the waiting state.
    fn dispatch(&mut self, msg: FuncMsg, rec: &mut EventRecord) -> Result<Option<Vec<Delivery>>, FuncError> {
        match msg {
            FuncMsg::InitHonest { sid, from, params } => {
                if self.pufs.contains_key(&sid) {
                    rec.note = Some("duplicate sid".into());
                    return Ok(None);
                }
                let puf = sample_puf(&params, self.rng.random()).map_err(FuncError::Puf)?;
                self.pufs.insert(sid, PufEntry::new(Mode::Honest, from, Some(puf), None));
                Ok(Some(vec![Delivery::Initialized { sid, to: from }]))
            }
            FuncMsg::InitMalicious { sid, from, program, inner } => {
                if self.pufs.contains_key(&sid) {
                    rec.note = Some("duplicate sid".into());
                    return Ok(None);
                }
                let puf = sample_puf(&inner, self.rng.random()).map_err(FuncError::Puf)?;
                let machine =
                    MaliciousPufMachine::new(program, self.config.budget.k_state, Some(puf)).map_err(FuncError::Puf)?;
                self.pufs.insert(sid, PufEntry::new(Mode::Malicious, from, None, Some(machine)));
                Ok(Some(vec![Delivery::Initialized { sid, to: from }]))
            }
            FuncMsg::Eval { sid, from, challenge } => self.eval(sid, from, challenge, rec),
            FuncMsg::InMsg { sid, from, payload } => self.in_msg(sid, from, payload, rec),
            FuncMsg::Handover { sid, from, to } => {
                let Some(e) = self.pufs.get_mut(&sid) else {
                    rec.note = Some("unknown sid".into());
                    return Ok(None);
                };
                if e.owner != Some(from) {
                    rec.note = Some("sender does not own the PUF".into());
                    return Ok(None);
                }
                e.owner = None;
                e.transit = Some((from, to));
                Ok(Some(vec![Delivery::Invoke { sid, from, to }]))
            }
            FuncMsg::Ready { sid, from } => {
                if from != Party::Adversary {
                    rec.note = Some("ready must come from the adversary".into());
                    return Ok(None);
                }
                let Some(e) = self.pufs.get_mut(&sid) else {
                    rec.note = Some("unknown sid".into());
                    return Ok(None);
                };
                let Some((pi, pj)) = e.transit.take() else {
                    rec.note = Some("PUF not in transit".into());
                    return Ok(None);
                };
                e.owner = Some(pj);
                self.received.insert((sid, pi));
                Ok(Some(vec![Delivery::HandedOver { sid, to: pj, from: pi }]))
            }
            FuncMsg::Received { sid, from, pi } => {
                if from != Party::Adversary {
                    rec.note = Some("received must come from the adversary".into());
                    return Ok(None);
                }
                if !self.received.remove(&(sid, pi)) {
                    rec.note = Some("no matching handover record".into());
                    return Ok(None);
                }
                Ok(Some(vec![Delivery::ReceivedAck { sid, to: pi }]))
            }
        }
    }

    fn eval(
        &mut self,
        sid: Sid,
        from: Party,
        challenge: BitString,
        rec: &mut EventRecord,
    ) -> Result<Option<Vec<Delivery>>, FuncError> {
        let budget = self.config.budget;
        let Some(e) = self.pufs.get_mut(&sid) else {
            rec.note = Some("unknown sid".into());
            return Ok(None);
        };
        let allowed = e.owner == Some(from) || (from == Party::Adversary && e.transit.is_some());
        if !allowed {
            rec.note = Some("caller neither owns the PUF nor is the adversary during transit".into());
            return Ok(None);
        }
        match e.mode {
            Mode::Honest => {
                let puf = e.honest.as_ref().expect("honest entry has an instance");
                let response = puf.eval(&challenge, &mut self.rng).map_err(|err| FuncError::Malformed(err.to_string()))?;
                self.tap.push(TapRecord {
                    step: rec.step,
                    sid,
                    querier: from,
                    challenge: challenge.clone(),
                    response: response.clone(),
                });
                Ok(Some(vec![Delivery::Response { sid, to: from, challenge, response: Some(response) }]))
            }
            Mode::Malicious => {
                let machine = e.machine.as_mut().expect("malicious entry has a machine");
                let (response, outgoing) = match machine.step(MachineInput::Query(&challenge), &mut self.rng) {
                    Ok(out) => out,
                    Err(err) => {
                        rec.note = Some(err.to_string());
                        (None, None)
                    }
                };
                let mut out = vec![Delivery::Response { sid, to: from, challenge, response }];
                let creator = e.creator;
                if let Some(m) = outgoing {
                    if let Some(d) = Self::debit_out(e, &budget, self.config.flavor, creator, sid, m, rec) {
                        out.push(d);
                    }
                }
                Ok(Some(out))
            }
        }
    }

    fn in_msg(
        &mut self,
        sid: Sid,
        from: Party,
        payload: BitString,
        rec: &mut EventRecord,
    ) -> Result<Option<Vec<Delivery>>, FuncError> {
        if self.config.flavor == Flavor::NonCommunicating {
            return Err(FuncError::Malformed("inmsg is not part of the non-communicating functionality".into()));
        }
        let budget = self.config.budget;
        let Some(e) = self.pufs.get_mut(&sid) else {
            rec.note = Some("unknown sid".into());
            return Ok(None);
        };
        if e.mode != Mode::Malicious || e.creator != from {
            rec.note = Some("only the creator of a malicious PUF may send it messages".into());
            return Ok(None);
        }
        let after = e.in_used + payload.len();
        if budget.k_in.is_some_and(|k| after > k) {
            rec.note = Some("k_in exhausted".into());
            return Ok(None);
        }
        e.in_used = after;
        let machine = e.machine.as_mut().expect("malicious entry has a machine");
        let outgoing = match machine.step(MachineInput::Msg(&payload), &mut self.rng) {
            Ok((_, out)) => out,
            Err(err) => {
                rec.note = Some(err.to_string());
                None
            }
        };
        let mut out = Vec::new();
        if let Some(m) = outgoing {
            if let Some(d) = Self::debit_out(e, &budget, self.config.flavor, from, sid, m, rec) {
                out.push(d);
            }
        }
        Ok(Some(out))
    }

    fn debit_out(
        e: &mut PufEntry,
        budget: &CommBudget,
        flavor: Flavor,
        to: Party,
        sid: Sid,
        payload: BitString,
        rec: &mut EventRecord,
    ) -> Option<Delivery> {
        let after = e.out_used + payload.len();
        if flavor == Flavor::NonCommunicating || budget.k_out.is_some_and(|k| after > k) {
            rec.note = Some("outgoing message dropped: k_out exhausted".into());
            return None;
        }
        e.out_used = after;
        Some(Delivery::OutMsg { sid, to, payload })
    }
}

impl PufEntry {
    fn new(mode: Mode, creator: Party, honest: Option<PufInstance>, machine: Option<MaliciousPufMachine>) -> Self {
        Self { mode, creator, honest, machine, owner: Some(creator), transit: None, in_used: 0, out_used: 0 }
    }
}
