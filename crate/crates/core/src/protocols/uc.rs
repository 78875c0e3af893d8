//! Bit commitment compiled from the collective extractable commitment.
//!
//! Commit phase:
//! 1. `R` draws `e in {0,1}^n` and commits to it (`n` one-bit strings);
//! 2. `S` splits `b` into `2n` blobs `(b_j^0, b_j^1)` with `b_j^0 XOR b_j^1 = b`
//!    and commits to all `4n` shares; blob `j`, share `t` is string `2j + t`;
//! 3. blob equalities on pairs `(2m, 2m+1)`: `S` sends `y_m = b_{2m}^0 XOR b_{2m+1}^0`,
//!    `R` opens `e`, `S` opens `b_{2m}^{e_m}` and `b_{2m+1}^{e_m}`, `R` checks `y_m`.
//!
//! Decommit: for each pair `S` picks one blob `l_m` and opens both of its shares;
//! `R` accepts `b` when every opened blob has value `b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{
    coll_commit, coll_open, CollCommitter, CollReceiver, CollSession, DeskConfig, ExtParams, HonestCollCommitter,
    HonestCollReceiver, ProtocolError, Verdict, World,
};
use crate::bitlab::BitString;
use crate::functionality::{Party, RECEIVER, SENDER};
use crate::seeds::derive_seed;

#[derive(Clone, Debug, PartialEq)]
pub struct UcParams {
    /// Number of blob pairs, equal to the security parameter.
    pub n: usize,
    /// One-bit collective commitments.
    pub bit: ExtParams,
}

impl UcParams {
    pub fn desk(cfg: &DeskConfig) -> Result<Self, ProtocolError> {
        let cfg = DeskConfig { k: 1, ..cfg.clone() };
        Ok(Self { n: cfg.n, bit: ExtParams::desk(&cfg)? })
    }

    /// Collective index of share `t` of blob `j`.
    pub fn share_index(j: usize, t: bool) -> usize {
        2 * j + t as usize
    }
}

fn bit(b: bool) -> BitString {
    BitString::from_bits(&[b])
}

fn bits_of(v: &[bool]) -> BitString {
    BitString::from_bits(v)
}

pub trait UcSender {
    fn party(&self) -> Party;

    /// Receiver role in the commitment to `e`.
    fn e_receiver(&mut self) -> &mut dyn CollReceiver;

    /// Chooses the blob shares once the commitment to `e` is complete.
    fn after_e_commit(&mut self, w: &World, params: &UcParams, e_session: &CollSession) -> Result<(), ProtocolError>;

    fn blob_committer(&mut self) -> &mut dyn CollCommitter;

    fn y(&mut self) -> Vec<bool>;

    /// Sees the opened challenge before answering it.
    fn on_e_opened(&mut self, _e: &[bool]) -> Result<(), ProtocolError> {
        Ok(())
    }

    /// Blob to open in each pair; `None` refuses to decommit.
    fn decommit_indices(&mut self) -> Option<Vec<usize>>;
}

pub trait UcReceiver {
    fn party(&self) -> Party;

    fn e_committer(&mut self) -> &mut dyn CollCommitter;

    fn blob_receiver(&mut self) -> &mut dyn CollReceiver;
}

pub struct HonestUcSender {
    b: bool,
    rng: ChaCha20Rng,
    e_receiver: HonestCollReceiver,
    blobs: Vec<(bool, bool)>,
    committer: Option<HonestCollCommitter>,
}

impl HonestUcSender {
    pub fn new(b: bool, seed: u64) -> Self {
        Self {
            b,
            rng: ChaCha20Rng::seed_from_u64(derive_seed(seed, "uc-sender", 0)),
            e_receiver: HonestCollReceiver::new(SENDER, derive_seed(seed, "uc-sender-e", 0)),
            blobs: Vec::new(),
            committer: None,
        }
    }

    pub fn blobs(&self) -> &[(bool, bool)] {
        &self.blobs
    }
}

/// Flattens blob shares into the `4n` committed one-bit strings.
pub(crate) fn blob_strings(blobs: &[(bool, bool)]) -> Vec<BitString> {
    blobs.iter().flat_map(|&(b0, b1)| [bit(b0), bit(b1)]).collect()
}

impl UcSender for HonestUcSender {
    fn party(&self) -> Party {
        SENDER
    }

    fn e_receiver(&mut self) -> &mut dyn CollReceiver {
        &mut self.e_receiver
    }

    fn after_e_commit(&mut self, _w: &World, params: &UcParams, _e: &CollSession) -> Result<(), ProtocolError> {
        let state = BlobState::honest(self.b, params.n, &mut self.rng);
        self.blobs = state.shares;
        self.committer = Some(HonestCollCommitter::new(SENDER, blob_strings(&self.blobs), self.rng.random()));
        Ok(())
    }

    fn blob_committer(&mut self) -> &mut dyn CollCommitter {
        self.committer.as_mut().expect("blobs are chosen before they are committed")
    }

    fn y(&mut self) -> Vec<bool> {
        BlobState { shares: self.blobs.clone() }.honest_y()
    }

    fn decommit_indices(&mut self) -> Option<Vec<usize>> {
        let n = self.blobs.len() / 2;
        Some((0..n).map(|m| 2 * m + self.rng.random_range(0..2usize)).collect())
    }
}

pub struct HonestUcReceiver {
    e: Vec<bool>,
    e_committer: HonestCollCommitter,
    blob_receiver: HonestCollReceiver,
}

impl HonestUcReceiver {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "uc-receiver", 0));
        let e: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        Self {
            e_committer: HonestCollCommitter::new(RECEIVER, e.iter().map(|&b| bit(b)).collect(), rng.random()),
            blob_receiver: HonestCollReceiver::new(RECEIVER, rng.random()),
            e,
        }
    }

    pub fn e(&self) -> &[bool] {
        &self.e
    }
}

impl UcReceiver for HonestUcReceiver {
    fn party(&self) -> Party {
        RECEIVER
    }

    fn e_committer(&mut self) -> &mut dyn CollCommitter {
        &mut self.e_committer
    }

    fn blob_receiver(&mut self) -> &mut dyn CollReceiver {
        &mut self.blob_receiver
    }
}

#[derive(Clone, Debug)]
pub struct UcCommitState {
    pub e_session: CollSession,
    pub blob_session: CollSession,
    pub e: Vec<bool>,
    pub y: Vec<bool>,
}

pub fn uc_commit(
    w: &mut World,
    params: &UcParams,
    sender: &mut dyn UcSender,
    receiver: &mut dyn UcReceiver,
) -> Result<UcCommitState, ProtocolError> {
    let n = params.n;
    let (s, r) = (sender.party(), receiver.party());
    let e_session = coll_commit(w, &params.bit, receiver.e_committer(), sender.e_receiver())?;
    if e_session.count != n {
        return Err(ProtocolError::Abort("e-count".into()));
    }
    sender.after_e_commit(w, params, &e_session)?;
    let blob_session = coll_commit(w, &params.bit, sender.blob_committer(), receiver.blob_receiver())?;
    if blob_session.count != 4 * n {
        return Err(ProtocolError::Abort("blob-count".into()));
    }

    let y = sender.y();
    w.message("commit", s, r, "y", &bits_of(&y));
    if y.len() != n {
        return Err(ProtocolError::Abort("malformed-y".into()));
    }
    let mut e = Vec::with_capacity(n);
    for m in 0..n {
        match coll_open(w, &params.bit, &e_session, receiver.e_committer(), m) {
            Verdict::Accept(v) => e.push(v.get(0)),
            Verdict::Reject(_) => return Err(ProtocolError::Abort("e-open".into())),
        }
    }
    sender.on_e_opened(&e)?;
    for (m, &em) in e.iter().enumerate() {
        let mut v = [false; 2];
        for (slot, j) in [2 * m, 2 * m + 1].into_iter().enumerate() {
            match coll_open(w, &params.bit, &blob_session, sender.blob_committer(), UcParams::share_index(j, em)) {
                Verdict::Accept(x) => v[slot] = x.get(0),
                Verdict::Reject(_) => return Err(ProtocolError::Abort("blob-open".into())),
            }
        }
        if y[m] != (v[0] ^ v[1]) {
            return Err(ProtocolError::Abort("blob-equality".into()));
        }
    }
    Ok(UcCommitState { e_session, blob_session, e, y })
}

pub fn uc_decommit(w: &mut World, params: &UcParams, state: &UcCommitState, sender: &mut dyn UcSender) -> Verdict {
    let (s, r) = (state.blob_session.committer, state.blob_session.receiver);
    let Some(ls) = sender.decommit_indices() else {
        return Verdict::Reject("no-decommit".into());
    };
    let idx_bits = BitString::concat_all(ls.iter().map(|&l| BitString::from_u64(l as u64, 32)).collect::<Vec<_>>().iter());
    w.message("decommit", s, r, "l", &idx_bits);
    if ls.len() != params.n || ls.iter().enumerate().any(|(m, &l)| l != 2 * m && l != 2 * m + 1) {
        return Verdict::Reject("bad-index".into());
    }
    let mut value = None;
    for &l in &ls {
        let mut shares = [false; 2];
        for t in [false, true] {
            match coll_open(w, &params.bit, &state.blob_session, sender.blob_committer(), UcParams::share_index(l, t)) {
                Verdict::Accept(x) => shares[t as usize] = x.get(0),
                Verdict::Reject(why) => return Verdict::Reject(format!("blob-open: {why}")),
            }
        }
        let v = shares[0] ^ shares[1];
        if value.is_some_and(|b| b != v) {
            return Verdict::Reject("inconsistent".into());
        }
        value = Some(v);
    }
    match value {
        Some(b) => Verdict::Accept(bit(b)),
        None => Verdict::Reject("empty".into()),
    }
}

/// Blob shares with idealised commitments, for checking the equality test in isolation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlobState {
    pub shares: Vec<(bool, bool)>,
}

impl BlobState {
    /// `2n` fresh blobs of value `b`.
    pub fn honest<R: Rng + ?Sized>(b: bool, n: usize, rng: &mut R) -> Self {
        Self {
            shares: (0..2 * n)
                .map(|_| {
                    let b0: bool = rng.random();
                    (b0, b0 ^ b)
                })
                .collect(),
        }
    }

    pub fn value(&self, j: usize) -> bool {
        self.shares[j].0 ^ self.shares[j].1
    }

    pub fn honest_y(&self) -> Vec<bool> {
        (0..self.shares.len() / 2).map(|m| self.shares[2 * m].0 ^ self.shares[2 * m + 1].0).collect()
    }
}

/// Receiver's test: `y_m` must equal the XOR of share `e_m` of both blobs of pair `m`.
pub fn blob_equalities(state: &BlobState, y: &[bool], e: &[bool]) -> bool {
    let n = state.shares.len() / 2;
    if y.len() != n || e.len() != n {
        return false;
    }
    (0..n).all(|m| {
        let pick = |(b0, b1): (bool, bool)| if e[m] { b1 } else { b0 };
        y[m] == pick(state.shares[2 * m]) ^ pick(state.shares[2 * m + 1])
    })
}

/// Honest run of the bit commitment with one single-string commitment per
/// committed value: one `n`-bit commitment to `e` and `4n` one-bit
/// commitments to the shares, executed one after another.
pub fn run_compat_commitment(w: &mut World, cfg: &DeskConfig, b: bool, seed: u64) -> Result<Verdict, ProtocolError> {
    let n = cfg.n;
    let e_params = ExtParams::desk(&DeskConfig { k: n, ..cfg.clone() })?;
    let bit_params = ExtParams::desk(&DeskConfig { k: 1, ..cfg.clone() })?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "compat", 0));

    let e: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut e_committer = HonestCollCommitter::new(RECEIVER, vec![bits_of(&e)], rng.random());
    let mut e_receiver = HonestCollReceiver::new(SENDER, rng.random());
    let e_session = coll_commit(w, &e_params, &mut e_committer, &mut e_receiver)?;

    let blobs = BlobState::honest(b, n, &mut rng);
    let mut committers = Vec::with_capacity(4 * n);
    let mut sessions = Vec::with_capacity(4 * n);
    for share in blob_strings(&blobs.shares) {
        let mut c = HonestCollCommitter::new(SENDER, vec![share], rng.random());
        let mut r = HonestCollReceiver::new(RECEIVER, rng.random());
        sessions.push(coll_commit(w, &bit_params, &mut c, &mut r)?);
        committers.push(c);
    }
    let y = blobs.honest_y();
    w.message("commit", SENDER, RECEIVER, "y", &bits_of(&y));
    let Verdict::Accept(e_open) = coll_open(w, &e_params, &e_session, &mut e_committer, 0) else {
        return Err(ProtocolError::Abort("e-open".into()));
    };
    let mut open_share = |w: &mut World, j: usize, t: bool| {
        let i = UcParams::share_index(j, t);
        coll_open(w, &bit_params, &sessions[i], &mut committers[i], 0).accepted().map(|x| x.get(0))
    };
    for m in 0..n {
        let em = e_open.get(m);
        let (Some(a), Some(c)) = (open_share(w, 2 * m, em), open_share(w, 2 * m + 1, em)) else {
            return Err(ProtocolError::Abort("blob-open".into()));
        };
        if y[m] != (a ^ c) {
            return Err(ProtocolError::Abort("blob-equality".into()));
        }
    }
    let mut value = None;
    for m in 0..n {
        let l = 2 * m + rng.random_range(0..2usize);
        let (Some(b0), Some(b1)) = (open_share(w, l, false), open_share(w, l, true)) else {
            return Ok(Verdict::Reject("blob-open".into()));
        };
        if value.is_some_and(|v| v != (b0 ^ b1)) {
            return Ok(Verdict::Reject("inconsistent".into()));
        }
        value = Some(b0 ^ b1);
    }
    Ok(value.map(|v| Verdict::Accept(bit(v))).unwrap_or(Verdict::Reject("empty".into())))
}
