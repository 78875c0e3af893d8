use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitlab::BitString;
use crate::pufmodel::{PufParams, PufProgram};

/// Session identifier of one PUF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sid(pub u64);

impl fmt::Display for Sid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    P(u8),
    /// The adversary, who schedules PUF deliveries and may touch PUFs in transit.
    Adversary,
}

/// Committer in the two-party protocols.
pub const SENDER: Party = Party::P(1);
/// Verifier in the two-party protocols.
pub const RECEIVER: Party = Party::P(2);

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::P(i) => write!(f, "P{i}"),
            Party::Adversary => f.write_str("Adv"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Honest,
    Malicious,
}

/// Per-PUF limits on malicious machines. `None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CommBudget {
    pub k_state: Option<usize>,
    pub k_in: Option<usize>,
    pub k_out: Option<usize>,
}

impl CommBudget {
    pub const UNBOUNDED: CommBudget = CommBudget { k_state: None, k_in: None, k_out: None };

    /// Stateless, silent malicious PUFs: no memory and no way to talk back.
    pub const STATELESS: CommBudget = CommBudget { k_state: Some(0), k_in: Some(0), k_out: Some(0) };
}

/// Which functionality to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// Malicious PUFs may exchange messages with their creator within the budget.
    Communicating,
    /// Plain malicious PUFs: no creator messages in either direction.
    NonCommunicating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuncConfig {
    pub flavor: Flavor,
    pub budget: CommBudget,
}

impl FuncConfig {
    pub fn communicating(budget: CommBudget) -> Self {
        Self { flavor: Flavor::Communicating, budget }
    }

    /// Non-communicating functionality; the state budget still applies.
    pub fn non_communicating(k_state: Option<usize>) -> Self {
        Self { flavor: Flavor::NonCommunicating, budget: CommBudget { k_state, k_in: Some(0), k_out: Some(0) } }
    }
}

/// Inputs to the functionality. `from` is the authenticated sender.
#[derive(Clone)]
pub enum FuncMsg {
    InitHonest { sid: Sid, from: Party, params: PufParams },
    InitMalicious { sid: Sid, from: Party, program: Arc<dyn PufProgram>, inner: PufParams },
    Eval { sid: Sid, from: Party, challenge: BitString },
    InMsg { sid: Sid, from: Party, payload: BitString },
    Handover { sid: Sid, from: Party, to: Party },
    Ready { sid: Sid, from: Party },
    Received { sid: Sid, from: Party, pi: Party },
}

impl fmt::Debug for FuncMsg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(sid {}, from {})", self.kind(), self.sid(), self.from())
    }
}

impl FuncMsg {
    pub fn sid(&self) -> Sid {
        match self {
            FuncMsg::InitHonest { sid, .. }
            | FuncMsg::InitMalicious { sid, .. }
            | FuncMsg::Eval { sid, .. }
            | FuncMsg::InMsg { sid, .. }
            | FuncMsg::Handover { sid, .. }
            | FuncMsg::Ready { sid, .. }
            | FuncMsg::Received { sid, .. } => *sid,
        }
    }

    pub fn from(&self) -> Party {
        match self {
            FuncMsg::InitHonest { from, .. }
            | FuncMsg::InitMalicious { from, .. }
            | FuncMsg::Eval { from, .. }
            | FuncMsg::InMsg { from, .. }
            | FuncMsg::Handover { from, .. }
            | FuncMsg::Ready { from, .. }
            | FuncMsg::Received { from, .. } => *from,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FuncMsg::InitHonest { .. } => "init-honest",
            FuncMsg::InitMalicious { .. } => "init-malicious",
            FuncMsg::Eval { .. } => "eval",
            FuncMsg::InMsg { .. } => "inmsg",
            FuncMsg::Handover { .. } => "handover",
            FuncMsg::Ready { .. } => "ready",
            FuncMsg::Received { .. } => "received",
        }
    }
}

/// Outputs of the functionality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delivery {
    Initialized { sid: Sid, to: Party },
    /// `response = None` is an abort by a malicious PUF.
    Response { sid: Sid, to: Party, challenge: BitString, response: Option<BitString> },
    OutMsg { sid: Sid, to: Party, payload: BitString },
    /// Tells the adversary a handover from `from` to `to` is pending.
    Invoke { sid: Sid, from: Party, to: Party },
    HandedOver { sid: Sid, to: Party, from: Party },
    ReceivedAck { sid: Sid, to: Party },
}

impl Delivery {
    pub fn to(&self) -> Party {
        match self {
            Delivery::Initialized { to, .. }
            | Delivery::Response { to, .. }
            | Delivery::OutMsg { to, .. }
            | Delivery::HandedOver { to, .. }
            | Delivery::ReceivedAck { to, .. } => *to,
            Delivery::Invoke { .. } => Party::Adversary,
        }
    }

    pub(crate) fn record(&self) -> DeliveryRecord {
        let (kind, payload_hex) = match self {
            Delivery::Initialized { .. } => ("initialized", String::new()),
            Delivery::Response { response, .. } => {
                ("response", response.as_ref().map(BitString::to_hex).unwrap_or_else(|| "abort".into()))
            }
            Delivery::OutMsg { payload, .. } => ("outmsg", payload.to_hex()),
            Delivery::Invoke { from, to, .. } => ("invoke", format!("{from}->{to}")),
            Delivery::HandedOver { from, .. } => ("handover", from.to_string()),
            Delivery::ReceivedAck { .. } => ("received", String::new()),
        };
        DeliveryRecord { to: self.to().to_string(), kind: kind.into(), payload_hex }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub to: String,
    pub kind: String,
    pub payload_hex: String,
}

/// One line of the functionality's event log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub step: u64,
    pub sid: u64,
    pub kind: String,
    pub sender: String,
    /// Handover target, or the original owner for `received`.
    pub target: Option<String>,
    pub payload_hex: String,
    /// False when the message was dropped (the functionality's waiting state).
    pub handled: bool,
    pub deliveries: Vec<DeliveryRecord>,
    /// Short reason for drops and budget enforcement.
    pub note: Option<String>,
}

impl EventRecord {
    pub fn is_transfer(&self) -> bool {
        self.handled && matches!(self.kind.as_str(), "handover" | "ready" | "received")
    }
}

/// Interface-access tap: one honest-PUF evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapRecord {
    pub step: u64,
    pub sid: Sid,
    pub querier: Party,
    pub challenge: BitString,
    pub response: BitString,
}
