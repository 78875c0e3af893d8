//! The bit commitment with one party corrupted, in the real world and in the
//! ideal world with `F_com` and a simulator, reduced to transcript features.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bitlab::{statistical_distance, BitString};
use crate::extractors::run_extractor_collective;
use crate::functionality::{FCom, FComDelivery, FComMsg, Party, RECEIVER, SENDER};
use crate::protocols::{
    blob_strings, standard_world, uc_commit, uc_decommit, BlobState, CollCommitter, CollReceiver, CollSession,
    DeskConfig, HonestCollCommitter, Resources, HonestCollReceiver, HonestUcReceiver, HonestUcSender, ProtocolError, UcCommitState,
    UcParams, UcSender, Verdict, World,
};
use crate::seeds::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UcSenderKind {
    Honest,
    /// Guesses `e` and commits to pairs of blobs with opposite values whose
    /// `y` matches the guess; passes the equality test only if the guess is right.
    EGuessing,
    /// Equal blobs within each pair, alternating values across pairs.
    Alternating,
}

impl UcSenderKind {
    pub fn id(self) -> &'static str {
        match self {
            UcSenderKind::Honest => "honest-sender",
            UcSenderKind::EGuessing => "e-guessing-sender",
            UcSenderKind::Alternating => "alternating-sender",
        }
    }
}

/// Sender whose blob layout is fixed by its kind.
pub struct ScriptedUcSender {
    kind: UcSenderKind,
    b: bool,
    rng: ChaCha20Rng,
    e_receiver: HonestCollReceiver,
    state: BlobState,
    y: Vec<bool>,
    committer: Option<HonestCollCommitter>,
}

impl ScriptedUcSender {
    pub fn new(kind: UcSenderKind, b: bool, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Self {
            kind,
            b,
            e_receiver: HonestCollReceiver::new(SENDER, rng.random()),
            rng,
            state: BlobState { shares: Vec::new() },
            y: Vec::new(),
            committer: None,
        }
    }
}

/// `2n` blobs where pair `m` holds values `v` and `!v`, with `y = f(guess)`.
pub fn guessing_blobs<R: Rng + ?Sized>(guess: &[bool], rng: &mut R) -> (BlobState, Vec<bool>) {
    let mut shares = Vec::with_capacity(2 * guess.len());
    let mut y = Vec::with_capacity(guess.len());
    for &g in guess {
        let v: bool = rng.random();
        let (a, c): (bool, bool) = (rng.random(), rng.random());
        let first = (a, a ^ v);
        let second = (c, c ^ !v);
        let pick = |(s0, s1): (bool, bool)| if g { s1 } else { s0 };
        y.push(pick(first) ^ pick(second));
        shares.push(first);
        shares.push(second);
    }
    (BlobState { shares }, y)
}

impl UcSender for ScriptedUcSender {
    fn party(&self) -> Party {
        SENDER
    }

    fn e_receiver(&mut self) -> &mut dyn CollReceiver {
        &mut self.e_receiver
    }

    fn after_e_commit(&mut self, _w: &World, params: &UcParams, _e: &CollSession) -> Result<(), ProtocolError> {
        let n = params.n;
        match self.kind {
            UcSenderKind::Honest => {
                self.state = BlobState::honest(self.b, n, &mut self.rng);
                self.y = self.state.honest_y();
            }
            UcSenderKind::EGuessing => {
                let guess: Vec<bool> = (0..n).map(|_| self.rng.random()).collect();
                (self.state, self.y) = guessing_blobs(&guess, &mut self.rng);
            }
            UcSenderKind::Alternating => {
                let shares = (0..2 * n)
                    .map(|j| {
                        let b0: bool = self.rng.random();
                        (b0, b0 ^ ((j / 2) % 2 == 1))
                    })
                    .collect();
                self.state = BlobState { shares };
                self.y = self.state.honest_y();
            }
        }
        self.committer = Some(HonestCollCommitter::new(SENDER, blob_strings(&self.state.shares), self.rng.random()));
        Ok(())
    }

    fn blob_committer(&mut self) -> &mut dyn CollCommitter {
        self.committer.as_mut().expect("blobs are chosen before they are committed")
    }

    fn y(&mut self) -> Vec<bool> {
        self.y.clone()
    }

    fn decommit_indices(&mut self) -> Option<Vec<usize>> {
        let n = self.state.shares.len() / 2;
        Some(
            (0..n)
                .map(|m| match self.kind {
                    UcSenderKind::EGuessing if self.state.value(2 * m) == self.b => 2 * m,
                    UcSenderKind::EGuessing => 2 * m + 1,
                    _ => 2 * m + self.rng.random_range(0..2usize),
                })
                .collect(),
        )
    }
}

/// Simulator for a corrupted receiver: plays the sender without knowing the bit.
pub struct ReceiverCaseSimulator {
    rng: ChaCha20Rng,
    e_receiver: HonestCollReceiver,
    e_star: Vec<Option<bool>>,
    /// `(l^0, l^1)` per pair: positions of the blob of 0 and the blob of 1.
    positions: Vec<(usize, usize)>,
    shares: Vec<(bool, bool)>,
    committer: Option<HonestCollCommitter>,
    open_bit: Option<bool>,
    pub aborted: bool,
}

impl ReceiverCaseSimulator {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Self {
            e_receiver: HonestCollReceiver::new(SENDER, rng.random()),
            rng,
            e_star: Vec::new(),
            positions: Vec::new(),
            shares: Vec::new(),
            committer: None,
            open_bit: None,
            aborted: false,
        }
    }

    pub fn extracted_e(&self) -> &[Option<bool>] {
        &self.e_star
    }

    /// The bit `F_com` reveals at opening time.
    pub fn set_open_bit(&mut self, b: bool) {
        self.open_bit = Some(b);
    }
}

impl UcSender for ReceiverCaseSimulator {
    fn party(&self) -> Party {
        SENDER
    }

    fn e_receiver(&mut self) -> &mut dyn CollReceiver {
        &mut self.e_receiver
    }

    fn after_e_commit(&mut self, w: &World, params: &UcParams, e: &CollSession) -> Result<(), ProtocolError> {
        self.e_star = run_extractor_collective(w.func(), &params.bit, e).into_iter().map(|x| x.map(|x| x.get(0))).collect();
        let n = params.n;
        self.shares = vec![(false, false); 2 * n];
        self.positions.clear();
        for m in 0..n {
            let (l0, l1) = if self.rng.random() { (2 * m, 2 * m + 1) } else { (2 * m + 1, 2 * m) };
            let a: bool = self.rng.random();
            self.shares[l0] = (a, a);
            let c: bool = self.rng.random();
            self.shares[l1] = (c, !c);
            self.positions.push((l0, l1));
        }
        self.committer = Some(HonestCollCommitter::new(SENDER, blob_strings(&self.shares), self.rng.random()));
        Ok(())
    }

    fn blob_committer(&mut self) -> &mut dyn CollCommitter {
        self.committer.as_mut().expect("blobs are chosen before they are committed")
    }

    fn y(&mut self) -> Vec<bool> {
        let pick = |(s0, s1): (bool, bool), e: bool| if e { s1 } else { s0 };
        (0..self.positions.len())
            .map(|m| match self.e_star.get(m).copied().flatten() {
                Some(e) => pick(self.shares[2 * m], e) ^ pick(self.shares[2 * m + 1], e),
                None => self.rng.random(),
            })
            .collect()
    }

    fn on_e_opened(&mut self, e: &[bool]) -> Result<(), ProtocolError> {
        let matches = e.len() == self.e_star.len() && e.iter().zip(&self.e_star).all(|(a, b)| Some(*a) == *b);
        if !matches {
            self.aborted = true;
            return Err(ProtocolError::Abort("sim-abort".into()));
        }
        Ok(())
    }

    fn decommit_indices(&mut self) -> Option<Vec<usize>> {
        let b = self.open_bit?;
        Some(self.positions.iter().map(|&(l0, l1)| if b { l1 } else { l0 }).collect())
    }
}

/// Seed-stable summary of one run, as the environment sees it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UcFeatures {
    /// `accept:<b>`, `reject`, `commit-abort:<step>` or `sim-abort`.
    pub outcome: String,
    pub transcript_bits: usize,
    pub y0: Option<bool>,
    pub y_parity: Option<bool>,
    /// First share opened during the equality test.
    pub equality_share: Option<bool>,
    /// First share opened in the decommit phase.
    pub decommit_share: Option<bool>,
    /// Not compared across worlds.
    pub resources: Resources,
}

impl UcFeatures {
    fn from_world(w: &World, n: usize, outcome: String) -> Self {
        let t = w.transcript();
        let y = t.iter().position(|e| e.name == "y");
        let y_bits = y.and_then(|i| BitString::from_hex(&t[i].payload_hex).ok());
        let share_after = |name: &str| {
            let start = t.iter().position(|e| e.name == name)?;
            let o = t[start..].iter().find(|e| e.name == "open" && e.from == SENDER)?;
            // index (32 bits) | s (n bits) | x
            BitString::from_hex(&o.payload_hex).ok().filter(|b| b.len() > 32 + n).map(|b| b.get(32 + n))
        };
        Self {
            outcome,
            transcript_bits: t.iter().map(|e| e.bits).sum(),
            y0: y_bits.as_ref().filter(|b| !b.is_empty()).map(|b| b.get(0)),
            y_parity: y_bits.as_ref().map(|b| b.count_ones() % 2 == 1),
            equality_share: share_after("y"),
            decommit_share: share_after("l"),
            resources: Resources::of(w),
        }
    }

    /// Feature name and value pairs compared across worlds.
    pub fn values(&self) -> Vec<(&'static str, String)> {
        let o = |v: Option<bool>| v.map(|b| (b as u8).to_string()).unwrap_or_else(|| "-".into());
        vec![
            ("outcome", self.outcome.clone()),
            ("transcript_bits", self.transcript_bits.to_string()),
            ("y0", o(self.y0)),
            ("y_parity", o(self.y_parity)),
            ("equality_share", o(self.equality_share)),
            ("decommit_share", o(self.decommit_share)),
        ]
    }
}

fn verdict_outcome(v: &Verdict) -> String {
    match v {
        Verdict::Accept(b) => format!("accept:{}", b.get(0) as u8),
        Verdict::Reject(_) => "reject".into(),
    }
}

/// Real world with a corrupted receiver; the receiver runs the honest code.
/// `b` is the environment's input to the sender.
pub fn real_receiver_case(cfg: &DeskConfig, b: bool, seed: u64) -> Result<UcFeatures, ProtocolError> {
    let params = UcParams::desk(cfg)?;
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut s = HonestUcSender::new(b, derive_seed(seed, "sender", 0));
    let mut r = HonestUcReceiver::new(params.n, derive_seed(seed, "receiver", 0));
    let outcome = match uc_commit(&mut w, &params, &mut s, &mut r) {
        Ok(state) => verdict_outcome(&uc_decommit(&mut w, &params, &state, &mut s)),
        Err(e) => format!("commit-abort:{}", e.step()),
    };
    Ok(UcFeatures::from_world(&w, params.n, outcome))
}

/// Ideal world with a corrupted receiver: the simulator talks to the receiver and learns the bit only from `F_com`.
pub fn ideal_receiver_case(cfg: &DeskConfig, b: bool, seed: u64) -> Result<(UcFeatures, ReceiverCaseSimulator), ProtocolError> {
    let params = UcParams::desk(cfg)?;
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut fcom = FCom::new();
    fcom.handle(SENDER, FComMsg::Commit(b));
    let mut sim = ReceiverCaseSimulator::new(derive_seed(seed, "sender", 0));
    let mut r = HonestUcReceiver::new(params.n, derive_seed(seed, "receiver", 0));
    let outcome = match uc_commit(&mut w, &params, &mut sim, &mut r) {
        Ok(state) => {
            for d in fcom.handle(SENDER, FComMsg::Open) {
                if let FComDelivery::Opened { to: Party::Adversary, bit } = d {
                    sim.set_open_bit(bit);
                }
            }
            verdict_outcome(&uc_decommit(&mut w, &params, &state, &mut sim))
        }
        Err(_) if sim.aborted => "sim-abort".into(),
        Err(e) => format!("commit-abort:{}", e.step()),
    };
    Ok((UcFeatures::from_world(&w, params.n, outcome), sim))
}

/// Real world with a corrupted sender against the honest receiver.
pub fn real_sender_case(kind: UcSenderKind, cfg: &DeskConfig, b: bool, seed: u64) -> Result<UcFeatures, ProtocolError> {
    let params = UcParams::desk(cfg)?;
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut s = ScriptedUcSender::new(kind, b, derive_seed(seed, "sender", 0));
    let mut r = HonestUcReceiver::new(params.n, derive_seed(seed, "receiver", 0));
    let outcome = match uc_commit(&mut w, &params, &mut s, &mut r) {
        Ok(state) => verdict_outcome(&uc_decommit(&mut w, &params, &state, &mut s)),
        Err(e) => format!("commit-abort:{}", e.step()),
    };
    Ok(UcFeatures::from_world(&w, params.n, outcome))
}

/// The set `A` of bits the sender can still open to, from the extracted shares.
pub fn decommittable_bits(extracted: &[Option<BitString>]) -> Vec<bool> {
    let n = extracted.len() / 4;
    let blob = |j: usize| -> Option<bool> {
        let s0 = extracted.get(UcParams::share_index(j, false))?.as_ref()?.get(0);
        let s1 = extracted.get(UcParams::share_index(j, true))?.as_ref()?.get(0);
        Some(s0 ^ s1)
    };
    [false, true]
        .into_iter()
        .filter(|&b| (0..n).all(|m| blob(2 * m) == Some(b) || blob(2 * m + 1) == Some(b)))
        .collect()
}

/// Result of the corrupted-sender ideal world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenderCaseRun {
    pub features: UcFeatures,
    /// The set `A`, when the commit phase completed.
    pub decommittable: Option<Vec<bool>>,
    /// The bit handed to `F_com`.
    pub sent: Option<bool>,
    pub sim_abort: bool,
}

/// Ideal world with a corrupted sender: the receiver extracts the blob
/// values and the simulator feeds `F_com`.
pub fn ideal_sender_case(kind: UcSenderKind, cfg: &DeskConfig, b: bool, seed: u64) -> Result<SenderCaseRun, ProtocolError> {
    let params = UcParams::desk(cfg)?;
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut s = ScriptedUcSender::new(kind, b, derive_seed(seed, "sender", 0));
    let mut r = HonestUcReceiver::new(params.n, derive_seed(seed, "receiver", 0));
    let mut fcom = FCom::new();
    let state: UcCommitState = match uc_commit(&mut w, &params, &mut s, &mut r) {
        Ok(state) => state,
        Err(e) => {
            let features = UcFeatures::from_world(&w, params.n, format!("commit-abort:{}", e.step()));
            return Ok(SenderCaseRun { features, decommittable: None, sent: None, sim_abort: false });
        }
    };
    let a = decommittable_bits(&run_extractor_collective(w.func(), &params.bit, &state.blob_session));
    let sent = match a.as_slice() {
        [] => Some(false),
        [b] => Some(*b),
        _ => None,
    };
    let Some(b_star) = sent else {
        let features = UcFeatures::from_world(&w, params.n, "sim-abort".into());
        return Ok(SenderCaseRun { features, decommittable: Some(a), sent: None, sim_abort: true });
    };
    fcom.handle(SENDER, FComMsg::Commit(b_star));
    let (outcome, sim_abort) = match uc_decommit(&mut w, &params, &state, &mut s) {
        Verdict::Accept(b) if b.get(0) == b_star => {
            let opened = fcom.handle(SENDER, FComMsg::Open).into_iter().find_map(|d| match d {
                FComDelivery::Opened { to, bit } if to == RECEIVER => Some(bit),
                _ => None,
            });
            (format!("accept:{}", opened.unwrap_or(b_star) as u8), false)
        }
        Verdict::Accept(_) => ("sim-abort".into(), true),
        Verdict::Reject(_) => ("reject".into(), false),
    };
    Ok(SenderCaseRun { features: UcFeatures::from_world(&w, params.n, outcome), decommittable: Some(a), sent, sim_abort })
}

/// Statistical distance between the two samples, per feature.
pub fn feature_distances(real: &[UcFeatures], ideal: &[UcFeatures]) -> Vec<(&'static str, f64)> {
    let names: Vec<&'static str> = real.first().or(ideal.first()).map(|f| f.values().iter().map(|v| v.0).collect()).unwrap_or_default();
    names
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let mut hist: BTreeMap<String, (f64, f64)> = BTreeMap::new();
            for f in real {
                hist.entry(f.values()[i].1.clone()).or_default().0 += 1.0;
            }
            for f in ideal {
                hist.entry(f.values()[i].1.clone()).or_default().1 += 1.0;
            }
            let p: Vec<f64> = hist.values().map(|v| v.0 / real.len().max(1) as f64).collect();
            let q: Vec<f64> = hist.values().map(|v| v.1 / ideal.len().max(1) as f64).collect();
            (name, statistical_distance(&p, &q).unwrap_or(1.0))
        })
        .collect()
}

/// Largest per-feature statistical distance between two samples of runs.
pub fn max_feature_distance(real: &[UcFeatures], ideal: &[UcFeatures]) -> (String, f64) {
    let mut worst = (String::new(), 0.0);
    for (name, sd) in feature_distances(real, ideal) {
        if sd > worst.1 || worst.0.is_empty() {
            worst = (name.to_string(), sd);
        }
    }
    worst
}
