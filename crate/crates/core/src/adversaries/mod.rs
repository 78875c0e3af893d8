//! Adversary strategies, the zoo registry and trial runners.

mod attack;
mod committers;
mod hiding;
mod order;
mod receivers;
pub mod uc_sim;

pub use attack::{attack_original_extpuf, AttackOriginalExtPuf};
pub use committers::{CommitterKind, ZooCommitter};
pub use hiding::{hiding_game, CommitView, Distinguisher};
pub use order::{check_order_discipline, OrderAudit};
pub use receivers::{ReceiverKind, ZooReceiver};
pub use uc_sim::UcSenderKind;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bitlab::BitString;
use crate::extractors::{run_extractor_collective, run_extractor_original};
use crate::functionality::{CommBudget, EventRecord, FuncConfig, RECEIVER, SENDER};
use crate::protocols::{
    coll_commit, coll_open, original_commit, original_decommit, standard_world, DeskConfig, ExtParams,
    HonestCollCommitter, HonestCollReceiver, HonestOriginalCommitter, OriginalCommitter, OriginalParams,
    ProtocolError, ProtocolId, Resources, UniformMasks, Verdict, World,
};
use crate::seeds::derive_seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    /// The strategy cannot be built against the target under the functionality's rules.
    #[error("UNCONSTRUCTIBLE: {0}")]
    Unconstructible(String),
    #[error("unknown adversary id {0:?}")]
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Committer,
    Receiver,
    UcSender,
}

/// One registered strategy.
#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub id: &'static str,
    pub role: Role,
    pub targets: Vec<ProtocolId>,
    pub description: &'static str,
}

/// The standard set of strategies, addressable by id.
pub fn zoo() -> Vec<ZooEntry> {
    use ProtocolId::*;
    let coll = vec![Extpuf, Collextpuf];
    let mut out: Vec<ZooEntry> = CommitterKind::ALL
        .iter()
        .map(|k| ZooEntry { id: k.id(), role: Role::Committer, targets: coll.clone(), description: k.describe() })
        .collect();
    out.extend(ReceiverKind::ALL.iter().map(|k| ZooEntry {
        id: k.id(),
        role: Role::Receiver,
        targets: coll.clone(),
        description: k.describe(),
    }));
    out.push(ZooEntry {
        id: "original-attacker",
        role: Role::Committer,
        targets: vec![OriginalExtpuf],
        description: "queries Enc(st1 XOR r1) on PUF_E before returning it, so the extractor sees two candidates",
    });
    for k in [UcSenderKind::Honest, UcSenderKind::EGuessing, UcSenderKind::Alternating] {
        out.push(ZooEntry {
            id: k.id(),
            role: Role::UcSender,
            targets: vec![Uccompiler],
            description: match k {
                UcSenderKind::Honest => "honest sender of the bit commitment",
                UcSenderKind::EGuessing => "guesses e and commits to mixed blob pairs",
                UcSenderKind::Alternating => "equal blobs per pair, alternating values across pairs",
            },
        });
    }
    out
}

pub fn zoo_entry(id: &str) -> Result<ZooEntry, AdversaryError> {
    zoo().into_iter().find(|e| e.id == id).ok_or_else(|| AdversaryError::Unknown(id.into()))
}

impl CommitterKind {
    pub fn describe(self) -> &'static str {
        match self {
            CommitterKind::Honest => "honest committer",
            CommitterKind::RandomDecommit => "opens every index to a fresh value",
            CommitterKind::PostReturnQuery => "queries PUF_E on Enc(st XOR r) after the return",
            CommitterKind::ExtraQuery => "adds a query Enc(st XOR u) for random u",
            CommitterKind::NoisyQuery => "queries a noisy codeword of st",
            CommitterKind::NonQuerying => "never queries PUF_E",
            CommitterKind::PufSubstituter => "returns its own PUF instead of PUF_E",
            CommitterKind::TransitQuerier => "queries PUF_E while it is in transit",
            CommitterKind::OutgoingProber => "sends through a PUF that tries to talk back",
            CommitterKind::Equivocator => "prepares two challenges per index and opens the second",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }
}

impl ReceiverKind {
    pub fn describe(self) -> &'static str {
        match self {
            ReceiverKind::Honest => "honest receiver",
            ReceiverKind::StatefulPufE => "PUF_E logs the first query and replays it later",
            ReceiverKind::AbortingPufE => "PUF_E aborts on every query",
            ReceiverKind::AllOnesR => "always sends the all-ones mask",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }
}

/// Budget usage per malicious PUF, read back from the event log.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BudgetAudit {
    pub in_bits: BTreeMap<u64, usize>,
    pub out_bits: BTreeMap<u64, usize>,
}

impl BudgetAudit {
    pub fn within(&self, budget: &CommBudget) -> bool {
        let ok = |m: &BTreeMap<u64, usize>, k: Option<usize>| k.is_none_or(|k| m.values().all(|&v| v <= k));
        ok(&self.in_bits, budget.k_in) && ok(&self.out_bits, budget.k_out)
    }
}

/// Sums the creator traffic the functionality actually carried.
pub fn audit_log(log: &[EventRecord]) -> BudgetAudit {
    let mut a = BudgetAudit::default();
    for e in log.iter().filter(|e| e.handled) {
        if e.kind == "inmsg" {
            *a.in_bits.entry(e.sid).or_default() += hex_bits(&e.payload_hex);
        }
        for d in e.deliveries.iter().filter(|d| d.kind == "outmsg") {
            *a.out_bits.entry(e.sid).or_default() += hex_bits(&d.payload_hex);
        }
    }
    a
}

fn hex_bits(h: &str) -> usize {
    BitString::from_hex(h).map(|b| b.len()).unwrap_or(0)
}

/// One zoo trial against the single-string or collective commitment.
#[derive(Clone, Debug, Serialize)]
pub struct ZooTrial {
    pub committed: Vec<BitString>,
    /// Abort label of the commit phase, if it did not complete.
    pub commit_abort: Option<String>,
    pub extracted: Vec<Option<BitString>>,
    pub accepted: Vec<Option<BitString>>,
    /// Indices opened to a value other than the extracted one.
    pub violations: usize,
    /// Every completed commit extracted the committed values.
    pub extraction_correct: bool,
    /// Ordering audit result, when the commit completed.
    pub order: Option<Result<usize, String>>,
    pub budgets_respected: bool,
    /// The construction itself was refused, e.g. by a state budget.
    pub construction_rejected: bool,
    /// Post-return queries that were answered; the functionality must keep this at 0.
    pub late_answers: usize,
    pub resources: Resources,
}

/// Runs `committer` against `receiver` on `extpuf` (`N = 1`) or `collextpuf`
/// (`N = count`), over the communicating functionality with `budget`.
pub fn zoo_trial(
    protocol: ProtocolId,
    committer: CommitterKind,
    receiver: ReceiverKind,
    cfg: &DeskConfig,
    count: usize,
    budget: CommBudget,
    seed: u64,
) -> Result<ZooTrial, AdversaryError> {
    let count = match protocol {
        ProtocolId::Extpuf => 1,
        ProtocolId::Collextpuf => count.max(1),
        other => return Err(AdversaryError::Unconstructible(format!("zoo trials run on extpuf and collextpuf, not {other}"))),
    };
    let params = ExtParams::desk(cfg).map_err(|e| AdversaryError::Unconstructible(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "values", 0));
    let xs: Vec<BitString> = (0..count).map(|_| BitString::random(params.k, &mut rng)).collect();
    let mut w = World::new(FuncConfig::communicating(budget), derive_seed(seed, "world", 0));
    let mut c = ZooCommitter::new(committer, SENDER, xs.clone(), derive_seed(seed, "committer", 0));
    let mut r = ZooReceiver::new(receiver, RECEIVER, derive_seed(seed, "receiver", 0));

    let session = match coll_commit(&mut w, &params, &mut c, &mut r) {
        Ok(s) => s,
        Err(e) => {
            let construction_rejected = matches!(&e, ProtocolError::Func(_))
                || e.to_string().contains("STATE_BUDGET");
            return Ok(ZooTrial {
                committed: xs,
                commit_abort: Some(e.step()),
                extracted: Vec::new(),
                accepted: Vec::new(),
                violations: 0,
                extraction_correct: true,
                order: None,
                budgets_respected: audit_log(w.func().log()).within(&budget),
                construction_rejected,
                late_answers: c.answered_queries,
                resources: Resources::of(&w),
            });
        }
    };
    let extracted = run_extractor_collective(w.func(), &params, &session);
    let order = Some(check_order_discipline(&w, &session).map(|a| a.refused_late_queries));
    let accepted: Vec<Option<BitString>> =
        (0..count).map(|i| coll_open(&mut w, &params, &session, &mut c, i).accepted().cloned()).collect();
    let violations = accepted.iter().zip(&extracted).filter(|(a, x)| a.is_some() && a.as_ref() != x.as_ref()).count();
    let extraction_correct = extracted.iter().zip(&xs).all(|(e, x)| e.as_ref() == Some(x));
    Ok(ZooTrial {
        committed: xs,
        commit_abort: None,
        extracted,
        accepted,
        violations,
        extraction_correct,
        order,
        budgets_respected: audit_log(w.func().log()).within(&budget),
        construction_rejected: false,
        late_answers: c.answered_queries,
        resources: Resources::of(&w),
    })
}

/// Honest single-string or collective run whose extraction is checked against the committed values.
pub fn honest_extraction(cfg: &DeskConfig, count: usize, seed: u64) -> Result<bool, ProtocolError> {
    let params = ExtParams::desk(cfg)?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "values", 0));
    let xs: Vec<BitString> = (0..count).map(|_| BitString::random(params.k, &mut rng)).collect();
    let mut w: World = standard_world(derive_seed(seed, "world", 0));
    let mut c = HonestCollCommitter::new(SENDER, xs.clone(), derive_seed(seed, "committer", 0));
    let mut r = HonestCollReceiver::new(RECEIVER, derive_seed(seed, "receiver", 0));
    let session = coll_commit(&mut w, &params, &mut c, &mut r)?;
    let ex = run_extractor_collective(w.func(), &params, &session);
    let opened_ok = (0..count).all(|i| matches!(coll_open(&mut w, &params, &session, &mut c, i), Verdict::Accept(ref x) if *x == xs[i]));
    Ok(opened_ok && ex.iter().zip(&xs).all(|(e, x)| e.as_ref() == Some(x)))
}

/// One run of the original two-PUF commitment, with its extraction.
#[derive(Clone, Debug, Serialize)]
pub struct OriginalTrial {
    pub committed: BitString,
    pub extracted: Option<BitString>,
    pub accepted: Option<BitString>,
    /// The attacker's extra `PUF_E` query was answered.
    pub extra_answered: bool,
    pub resources: Resources,
}

impl OriginalTrial {
    /// Accepted decommitment to a value the extractor did not output.
    pub fn violation(&self) -> bool {
        self.accepted.is_some() && self.accepted != self.extracted
    }
}

/// Runs the original commitment with the attacker (`attack = true`) or an honest committer to `0^k`.
pub fn original_trial(cfg: &DeskConfig, attack: bool, seed: u64) -> Result<OriginalTrial, ProtocolError> {
    let params = OriginalParams::desk(cfg)?;
    let committed = BitString::zeros(params.k);
    let cseed = derive_seed(seed, "committer", 0);
    if attack {
        let mut a = attack_original_extpuf(ProtocolId::OriginalExtpuf, SENDER, params.k, cseed)
            .map_err(|e| ProtocolError::Params(e.to_string()))?;
        let (extracted, accepted, resources) = run_original(&params, &mut a, seed)?;
        Ok(OriginalTrial { committed, extracted, accepted, extra_answered: a.extra_answered, resources })
    } else {
        let mut h = HonestOriginalCommitter::new(SENDER, committed.clone(), cseed);
        let (extracted, accepted, resources) = run_original(&params, &mut h, seed)?;
        Ok(OriginalTrial { committed, extracted, accepted, extra_answered: false, resources })
    }
}

type Extracted = Option<BitString>;

fn run_original(
    params: &OriginalParams,
    committer: &mut dyn OriginalCommitter,
    seed: u64,
) -> Result<(Extracted, Option<BitString>, Resources), ProtocolError> {
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut masks = UniformMasks(ChaCha20Rng::seed_from_u64(derive_seed(seed, "masks", 0)));
    let session = original_commit(&mut w, params, committer, RECEIVER, derive_seed(seed, "receiver", 0), &mut masks)?;
    let extracted = run_extractor_original(w.func(), params, &session);
    let accepted = original_decommit(&mut w, params, &session, committer)?.accepted().cloned();
    Ok((extracted, accepted, Resources::of(&w)))
}

/// Random-decommit against the single-PUF commitment: commits to `x`, opens to a fresh `y != x`.
/// Returns whether the receiver accepted.
pub fn cpuf_binding_trial(cfg: &DeskConfig, seed: u64) -> Result<(bool, Resources), ProtocolError> {
    use rand::Rng;
    use crate::protocols::{cpuf_commit, cpuf_verify, CpufParams, HonestCpufCommitter};

    let params = CpufParams::desk(cfg)?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "values", 0));
    let x = BitString::random(params.k, &mut rng);
    let y = loop {
        let y = BitString::random(params.k, &mut rng);
        if y != x {
            break y;
        }
    };
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut c = HonestCpufCommitter::new(SENDER, x, derive_seed(seed, "committer", 0));
    let mut masks = UniformMasks(ChaCha20Rng::seed_from_u64(rng.random()));
    let session = cpuf_commit(&mut w, &params, &mut c, RECEIVER, &mut masks)?;
    let accepted = match c.opening_with(y) {
        Some(o) => cpuf_verify(&mut w, &params, &session, &o).accepted().is_some(),
        None => false,
    };
    Ok((accepted, Resources::of(&w)))
}
