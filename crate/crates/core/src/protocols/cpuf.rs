//! Commitment to a `k`-bit string from a single PUF.
//!
//! 1. `S` creates `PUF`, draws `s`, computes `(st, p) = Gen(PUF(s))`, hands `PUF` to `R` and sends `p`;
//! 2. `R` sends a random `r` of `k*l` bits;
//! 3. `S` sends `c = st XOR (x^l AND r)`.
//!
//! Opening: `S` sends `(s, x)`; `R` recomputes `st = Rep(PUF(s), p)` and checks `c`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::masking::mask;
use super::{CpufParams, EventRange, MaskChooser, ProtocolError, Verdict, World};
use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::fuzzyext::HelperData;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpufOpening {
    pub s: BitString,
    pub x: BitString,
}

pub trait CpufCommitter {
    fn party(&self) -> Party;

    /// Creates the PUF and returns it with the helper data `p`.
    fn create(&mut self, w: &mut World, params: &CpufParams) -> Result<(Sid, HelperData), ProtocolError>;

    fn respond(&mut self, w: &mut World, params: &CpufParams, r: &BitString) -> Result<BitString, ProtocolError>;

    fn open(&mut self, w: &mut World, params: &CpufParams) -> Option<CpufOpening>;
}

pub struct HonestCpufCommitter {
    party: Party,
    x: BitString,
    rng: ChaCha20Rng,
    s: Option<BitString>,
    st: Option<BitString>,
}

impl HonestCpufCommitter {
    pub fn new(party: Party, x: BitString, seed: u64) -> Self {
        Self { party, x, rng: ChaCha20Rng::seed_from_u64(seed), s: None, st: None }
    }

    pub fn value(&self) -> &BitString {
        &self.x
    }

    pub fn opening_with(&self, x: BitString) -> Option<CpufOpening> {
        Some(CpufOpening { s: self.s.clone()?, x })
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

impl CpufCommitter for HonestCpufCommitter {
    fn party(&self) -> Party {
        self.party
    }

    fn create(&mut self, w: &mut World, params: &CpufParams) -> Result<(Sid, HelperData), ProtocolError> {
        if self.x.len() != params.k {
            return Err(ProtocolError::Params(format!("committed string must have {} bits", params.k)));
        }
        let puf = w.create_honest(self.party, &params.main.puf)?;
        let s = BitString::random(params.n, &mut self.rng);
        let sigma = w.eval_ok(self.party, puf, &s).ok_or_else(|| ProtocolError::Abort("own-puf".into()))?;
        let (st, p) = params.main.fe.gen(&sigma, &mut self.rng).map_err(|e| ProtocolError::Abort(e.to_string()))?;
        self.s = Some(s);
        self.st = Some(st);
        Ok((puf, p))
    }

    fn respond(&mut self, _w: &mut World, params: &CpufParams, r: &BitString) -> Result<BitString, ProtocolError> {
        if r.len() != params.st_len() {
            return Err(ProtocolError::Abort("malformed-r".into()));
        }
        let st = self.st.as_ref().ok_or_else(|| ProtocolError::Abort("respond-before-create".into()))?;
        Ok(st.xor(&mask(&self.x, r)?)?)
    }

    fn open(&mut self, _w: &mut World, _params: &CpufParams) -> Option<CpufOpening> {
        self.opening_with(self.x.clone())
    }
}

#[derive(Clone, Debug)]
pub struct CpufSession {
    pub committer: Party,
    pub receiver: Party,
    pub puf: Sid,
    pub p: HelperData,
    pub r: BitString,
    pub c: BitString,
    pub commit_events: EventRange,
}

pub fn cpuf_commit(
    w: &mut World,
    params: &CpufParams,
    committer: &mut dyn CpufCommitter,
    receiver: Party,
    masks: &mut dyn MaskChooser,
) -> Result<CpufSession, ProtocolError> {
    let start = w.event_count();
    let s = committer.party();
    let (puf, p) = committer.create(w, params)?;
    let t = w.exchange_plain(&[(puf, s, receiver)])?;
    if !t[0].delivered {
        return Err(ProtocolError::Abort("puf-exchange".into()));
    }
    w.message("commit", s, receiver, "p", &p.to_bits());
    if p.sketch.len() != params.main.puf.rg || p.hash_seed.len() != params.main.fe.params().seed_len() {
        return Err(ProtocolError::Abort("malformed-p".into()));
    }
    let r = masks.choose(1, params.st_len()).remove(0);
    w.message("commit", receiver, s, "r", &r);
    let c = committer.respond(w, params, &r)?;
    w.message("commit", s, receiver, "c", &c);
    if c.len() != params.st_len() {
        return Err(ProtocolError::Abort("malformed-c".into()));
    }
    Ok(CpufSession { committer: s, receiver, puf, p, r, c, commit_events: start..w.event_count() })
}

pub fn cpuf_verify(w: &mut World, params: &CpufParams, session: &CpufSession, o: &CpufOpening) -> Verdict {
    w.message("decommit", session.committer, session.receiver, "open", &o.s.concat(&o.x));
    if o.s.len() != params.n || o.x.len() != params.k {
        return Verdict::Reject("malformed-opening".into());
    }
    let Some(sigma) = w.eval_ok(session.receiver, session.puf, &o.s) else {
        return Verdict::Reject("puf-eval".into());
    };
    let Ok(st) = params.main.fe.rep(&sigma, &session.p) else {
        return Verdict::Reject("rep".into());
    };
    match mask(&o.x, &session.r).and_then(|m| st.xor(&m)) {
        Ok(expected) if expected == session.c => Verdict::Accept(o.x.clone()),
        _ => Verdict::Reject("c-mismatch".into()),
    }
}
