use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::bitlab::BitString;
use crate::functionality::{Delivery, FuncConfig, FuncError, FuncMsg, Party, PufFunctionality, Sid};
use crate::pufmodel::{PufParams, PufProgram};

/// One protocol message between parties (PUF traffic lives in the functionality log).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    /// Number of functionality events that happened before this message.
    pub at_event: usize,
    pub phase: String,
    pub from: Party,
    pub to: Party,
    pub name: String,
    pub bits: usize,
    pub payload_hex: String,
}

/// Result of asking the functionality to evaluate a PUF.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    /// The request was dropped: the caller had no access to the PUF.
    Dropped,
    /// `None` when a malicious PUF aborted.
    Response(Option<BitString>),
}

impl EvalOutcome {
    pub fn response(self) -> Option<BitString> {
        match self {
            EvalOutcome::Response(r) => r,
            EvalOutcome::Dropped => None,
        }
    }
}

/// A completed or refused PUF handover.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub sid: Sid,
    pub from: Party,
    pub to: Party,
    pub delivered: bool,
}

/// Everything one protocol run shares: the PUF functionality and the message transcript.
pub struct World {
    func: PufFunctionality,
    transcript: Vec<TranscriptEntry>,
    next_sid: u64,
}

impl World {
    pub fn new(config: FuncConfig, seed: u64) -> Self {
        Self { func: PufFunctionality::new(config, seed), transcript: Vec::new(), next_sid: 1 }
    }

    pub fn func(&self) -> &PufFunctionality {
        &self.func
    }

    /// Direct access for tests and adversaries that speak to the functionality themselves.
    pub fn func_mut(&mut self) -> &mut PufFunctionality {
        &mut self.func
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn transcript_jsonl(&self) -> String {
        self.transcript.iter().map(|t| serde_json::to_string(t).expect("transcript serialises") + "\n").collect()
    }

    pub fn event_count(&self) -> usize {
        self.func.log().len()
    }

    pub fn fresh_sid(&mut self) -> Sid {
        let sid = Sid(self.next_sid);
        self.next_sid += 1;
        sid
    }

    pub fn create_honest(&mut self, owner: Party, params: &PufParams) -> Result<Sid, ProtocolError> {
        let sid = self.fresh_sid();
        self.func.handle(FuncMsg::InitHonest { sid, from: owner, params: params.clone() })?;
        Ok(sid)
    }

    pub fn create_malicious(
        &mut self,
        owner: Party,
        program: Arc<dyn PufProgram>,
        inner: &PufParams,
    ) -> Result<Sid, ProtocolError> {
        let sid = self.fresh_sid();
        self.func.handle(FuncMsg::InitMalicious { sid, from: owner, program, inner: inner.clone() })?;
        Ok(sid)
    }

    pub fn eval(&mut self, who: Party, sid: Sid, challenge: &BitString) -> Result<EvalOutcome, FuncError> {
        let out = self.func.handle(FuncMsg::Eval { sid, from: who, challenge: challenge.clone() })?;
        Ok(out
            .into_iter()
            .find_map(|d| match d {
                Delivery::Response { to, response, .. } if to == who => Some(EvalOutcome::Response(response)),
                _ => None,
            })
            .unwrap_or(EvalOutcome::Dropped))
    }

    /// Evaluation by an honest party, whose challenges are always well formed.
    pub fn eval_ok(&mut self, who: Party, sid: Sid, challenge: &BitString) -> Option<BitString> {
        self.eval(who, sid, challenge).ok().and_then(EvalOutcome::response)
    }

    /// Message from a malicious PUF's creator; returns the PUF's reply if one was delivered.
    pub fn in_msg(&mut self, who: Party, sid: Sid, payload: &BitString) -> Result<Option<BitString>, FuncError> {
        let out = self.func.handle(FuncMsg::InMsg { sid, from: who, payload: payload.clone() })?;
        Ok(out.into_iter().find_map(|d| match d {
            Delivery::OutMsg { payload, .. } => Some(payload),
            _ => None,
        }))
    }

    /// One PUF exchange phase: all handovers are requested, then the adversary
    /// gets its window on the PUFs in transit, then everything is delivered.
    pub fn exchange(
        &mut self,
        transfers: &[(Sid, Party, Party)],
        in_transit: &mut dyn FnMut(&mut World, &[Sid]),
    ) -> Result<Vec<Transfer>, ProtocolError> {
        let mut pending = Vec::new();
        let mut result = Vec::new();
        for &(sid, from, to) in transfers {
            let out = self.func.handle(FuncMsg::Handover { sid, from, to })?;
            let invoked = out.iter().any(|d| matches!(d, Delivery::Invoke { .. }));
            if invoked {
                pending.push(sid);
            }
            result.push(Transfer { sid, from, to, delivered: invoked });
        }
        in_transit(self, &pending);
        for t in result.iter().filter(|t| t.delivered) {
            self.func.handle(FuncMsg::Ready { sid: t.sid, from: Party::Adversary })?;
        }
        for t in result.iter().filter(|t| t.delivered) {
            self.func.handle(FuncMsg::Received { sid: t.sid, from: Party::Adversary, pi: t.from })?;
        }
        Ok(result)
    }

    /// Exchange with no adversarial activity during transit.
    pub fn exchange_plain(&mut self, transfers: &[(Sid, Party, Party)]) -> Result<Vec<Transfer>, ProtocolError> {
        self.exchange(transfers, &mut |_, _| {})
    }

    pub fn message(&mut self, phase: &str, from: Party, to: Party, name: &str, payload: &BitString) {
        self.transcript.push(TranscriptEntry {
            seq: self.transcript.len() as u64,
            at_event: self.func.log().len(),
            phase: phase.into(),
            from,
            to,
            name: name.into(),
            bits: payload.len(),
            payload_hex: payload.to_hex(),
        });
    }
}
