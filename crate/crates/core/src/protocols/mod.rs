//! Commitment protocols as message-level state machines over a [`World`].
//!
//! Parties are strategy objects; honest strategies live here and deviating
//! ones in [`crate::adversaries`]. The drivers fix the message order, so a
//! strategy can only choose *what* to send, never *when*.

mod collective;
mod costs;
mod cpuf;
pub mod masking;
mod original;
mod params;
mod testquery;
mod uc;
mod world;

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

pub use collective::{
    coll_commit, coll_open, coll_verify, extpuf_commit, extpuf_decommit, CollCommitter, CollOpening, CollPrep,
    CollReceiver, CollSession, HonestCollCommitter, HonestCollReceiver,
};
pub use costs::{cost_from_log, cost_report, CostReport, Resources};
pub use cpuf::{cpuf_commit, cpuf_verify, CpufCommitter, CpufOpening, CpufSession, HonestCpufCommitter};
pub use original::{
    original_commit, original_decommit, HonestOriginalCommitter, OriginalCommitter, OriginalOpening, OriginalSession,
    OriginalSetup,
};
pub use params::{Bundle, CpufParams, DeskConfig, ExtParams, OriginalParams};
pub use testquery::TestQuery;
pub use uc::{
    blob_equalities, run_compat_commitment, uc_commit, uc_decommit, BlobState, HonestUcReceiver, HonestUcSender,
    UcCommitState, UcParams, UcReceiver, UcSender,
};
pub use world::{EvalOutcome, TranscriptEntry, Transfer, World};
pub(crate) use uc::blob_strings;

use crate::bitlab::BitError;
use crate::functionality::{CommBudget, FuncError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    /// A party stopped the protocol at the named step.
    #[error("PROTOCOL_ABORT({0})")]
    Abort(String),
    /// The returned extraction PUF failed the receiver's test query.
    #[error("TQ_FAIL")]
    TqFail,
    #[error("invalid protocol parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Func(#[from] FuncError),
}

impl From<BitError> for ProtocolError {
    fn from(e: BitError) -> Self {
        ProtocolError::Abort(format!("malformed message: {e}"))
    }
}

impl ProtocolError {
    /// Short label for abort histograms.
    pub fn step(&self) -> String {
        match self {
            ProtocolError::Abort(s) => s.clone(),
            ProtocolError::TqFail => "tq-fail".into(),
            ProtocolError::Params(_) => "params".into(),
            ProtocolError::Func(_) => "functionality".into(),
        }
    }
}

/// Receiver's decision on a decommitment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accept(crate::bitlab::BitString),
    Reject(String),
}

impl Verdict {
    pub fn accepted(&self) -> Option<&crate::bitlab::BitString> {
        match self {
            Verdict::Accept(x) => Some(x),
            Verdict::Reject(_) => None,
        }
    }

    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }
}

/// Chooses the receiver's random masks.
pub trait MaskChooser {
    fn choose(&mut self, count: usize, len: usize) -> Vec<crate::bitlab::BitString>;
}

/// Uniform masks, as an honest receiver draws them.
pub struct UniformMasks<R>(pub R);

impl<R: rand::Rng> MaskChooser for UniformMasks<R> {
    fn choose(&mut self, count: usize, len: usize) -> Vec<crate::bitlab::BitString> {
        (0..count).map(|_| crate::bitlab::BitString::random(len, &mut self.0)).collect()
    }
}

/// Functionality events between two points of a run.
pub type EventRange = Range<usize>;

/// Stable protocol identifiers used by configs and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    Cpuf,
    OriginalExtpuf,
    Extpuf,
    Collextpuf,
    BlobEqualities,
    Uccompiler,
    /// The bit commitment over one single-string commitment per committed value.
    UccompilerCompat,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 7] = [
        ProtocolId::Cpuf,
        ProtocolId::OriginalExtpuf,
        ProtocolId::Extpuf,
        ProtocolId::Collextpuf,
        ProtocolId::BlobEqualities,
        ProtocolId::Uccompiler,
        ProtocolId::UccompilerCompat,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ProtocolId::Cpuf => "cpuf",
            ProtocolId::OriginalExtpuf => "original-extpuf",
            ProtocolId::Extpuf => "extpuf",
            ProtocolId::Collextpuf => "collextpuf",
            ProtocolId::BlobEqualities => "blob-equalities",
            ProtocolId::Uccompiler => "uccompiler",
            ProtocolId::UccompilerCompat => "uccompiler-compat",
        }
    }
}

impl std::fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for ProtocolId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolId::ALL.into_iter().find(|p| p.id() == s).ok_or_else(|| format!("unknown protocol `{s}`"))
    }
}

/// Budget under which the extractable commitments are proven: malicious
/// PUFs are stateless and cannot talk back, incoming messages are unbounded.
pub const EXTRACTABLE_BUDGET: CommBudget = CommBudget { k_state: Some(0), k_in: None, k_out: Some(0) };

/// Fresh world over the communicating functionality with [`EXTRACTABLE_BUDGET`].
pub fn standard_world(seed: u64) -> World {
    World::new(crate::functionality::FuncConfig::communicating(EXTRACTABLE_BUDGET), seed)
}
