//! Extractable commitment to `N` strings with one committer PUF and one
//! extraction PUF, opened one index at a time. `N = 1` is the single-string
//! commitment.
//!
//! Commit phase:
//! 1. committer `S` creates `PUF`, draws `s^i`, computes `(st^i, p^i) = Gen(PUF(s^i))`;
//!    receiver `R` creates `PUF_E` and records a test query;
//! 2. exchange: `PUF` goes to `R`, `PUF_E` to `S`; `S` sends `p`;
//! 3. `S` computes `(st_E^i, p_E^i) = Gen_E(PUF_E(Enc(st^i)))` (all zeros if `PUF_E` aborts);
//! 4. exchange: `PUF_E` returns to `R`, who checks the test query;
//! 5. `R` sends masks `r^i`; `S` answers `c^i = st^i XOR (x^i)^n AND r^i`.
//!
//! Opening `i` reveals `(s^i, x^i, st_E^i, p_E^i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::masking::mask;
use super::{EventRange, ExtParams, MaskChooser, ProtocolError, TestQuery, UniformMasks, Verdict, World};
use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::fuzzyext::HelperData;

pub struct CollPrep {
    pub puf: Sid,
    pub helpers: Vec<HelperData>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollOpening {
    pub index: usize,
    pub s: BitString,
    pub x: BitString,
    pub st_e: BitString,
    pub p_e: HelperData,
}

impl CollOpening {
    fn to_bits(&self) -> BitString {
        let idx = BitString::from_u64(self.index as u64, 32);
        BitString::concat_all([&idx, &self.s, &self.x, &self.st_e, &self.p_e.to_bits()])
    }
}

/// Committer side of the collective commitment.
pub trait CollCommitter {
    fn party(&self) -> Party;

    /// Number of committed strings `N`.
    fn count(&self) -> usize;

    /// Creates the committer PUF and the helper strings `p^i`.
    fn prepare(&mut self, w: &mut World, params: &ExtParams) -> Result<CollPrep, ProtocolError>;

    /// Window in which the committer holds the receiver's extraction PUF.
    fn use_puf_e(&mut self, w: &mut World, params: &ExtParams, puf_e: Sid) -> Result<(), ProtocolError>;

    /// The PUF handed back as `PUF_E`.
    fn returned_puf(&mut self, puf_e: Sid) -> Sid {
        puf_e
    }

    /// Called during every exchange phase of the commit with the PUFs in
    /// transit; a corrupted committer acts as the adversary here.
    fn in_transit(&mut self, _w: &mut World, _params: &ExtParams, _sids: &[Sid]) {}

    fn respond(&mut self, w: &mut World, params: &ExtParams, r: &[BitString]) -> Result<Vec<BitString>, ProtocolError>;

    fn open(&mut self, w: &mut World, params: &ExtParams, index: usize) -> Option<CollOpening>;
}

/// Receiver side of the collective commitment, up to the end of the commit phase.
pub trait CollReceiver {
    fn party(&self) -> Party;

    fn create_puf_e(&mut self, w: &mut World, params: &ExtParams) -> Result<Sid, ProtocolError>;

    fn verify_returned(&mut self, w: &mut World, params: &ExtParams, returned: Sid) -> bool;

    fn choose_r(&mut self, count: usize, len: usize) -> Vec<BitString>;
}

/// What the receiver holds after a completed commit phase.
#[derive(Clone, Debug)]
pub struct CollSession {
    pub committer: Party,
    pub receiver: Party,
    pub count: usize,
    pub puf: Sid,
    pub helpers: Vec<HelperData>,
    /// The extraction PUF the receiver created and lent out.
    pub puf_e_lent: Sid,
    /// The PUF the committer handed back in its place.
    pub puf_e: Sid,
    pub r: Vec<BitString>,
    pub c: Vec<BitString>,
    pub commit_events: EventRange,
}

pub struct HonestCollCommitter {
    party: Party,
    xs: Vec<BitString>,
    rng: ChaCha20Rng,
    puf: Option<Sid>,
    s: Vec<BitString>,
    st: Vec<BitString>,
    st_e: Vec<BitString>,
    p_e: Vec<HelperData>,
}

impl HonestCollCommitter {
    pub fn new(party: Party, xs: Vec<BitString>, seed: u64) -> Self {
        Self {
            party,
            xs,
            rng: ChaCha20Rng::seed_from_u64(seed),
            puf: None,
            s: Vec::new(),
            st: Vec::new(),
            st_e: Vec::new(),
            p_e: Vec::new(),
        }
    }

    pub fn values(&self) -> &[BitString] {
        &self.xs
    }

    pub fn st(&self) -> &[BitString] {
        &self.st
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    /// Opening for string `index` claiming value `x` (honest when `x` is the committed value).
    pub fn opening_with(&self, index: usize, x: BitString) -> Option<CollOpening> {
        Some(CollOpening {
            index,
            s: self.s.get(index)?.clone(),
            x,
            st_e: self.st_e.get(index)?.clone(),
            p_e: self.p_e.get(index)?.clone(),
        })
    }

    pub fn puf(&self) -> Option<Sid> {
        self.puf
    }

    /// Installs a preparation made outside [`CollCommitter::prepare`].
    pub(crate) fn replace_preparation(&mut self, puf: Sid, s: Vec<BitString>, st: Vec<BitString>) {
        self.puf = Some(puf);
        self.s = s;
        self.st = st;
    }

    /// Sets `(st_E^i, p_E^i)` from `Gen_E(PUF_E(q_i))`; a missing query or an
    /// aborting `PUF_E` gives all zeros.
    pub fn use_puf_e_on(&mut self, w: &mut World, params: &ExtParams, puf_e: Sid, queries: &[Option<BitString>]) {
        self.st_e.clear();
        self.p_e.clear();
        for q in queries {
            let gen = q
                .as_ref()
                .and_then(|q| w.eval_ok(self.party, puf_e, q))
                .filter(|sigma| sigma.len() == params.ext.puf.rg)
                .and_then(|sigma| params.ext.fe.gen(&sigma, &mut self.rng).ok());
            let (st_e, p_e) = gen.unwrap_or_else(|| {
                (BitString::zeros(params.ext.out_len()), HelperData::zero(params.ext.fe.params()))
            });
            self.st_e.push(st_e);
            self.p_e.push(p_e);
        }
    }
}


impl CollCommitter for HonestCollCommitter {
    fn party(&self) -> Party {
        self.party
    }

    fn count(&self) -> usize {
        self.xs.len()
    }

    fn prepare(&mut self, w: &mut World, params: &ExtParams) -> Result<CollPrep, ProtocolError> {
        if self.xs.iter().any(|x| x.len() != params.k) {
            return Err(ProtocolError::Params(format!("committed strings must have {} bits", params.k)));
        }
        let puf = w.create_honest(self.party, &params.main.puf)?;
        self.puf = Some(puf);
        let mut helpers = Vec::with_capacity(self.xs.len());
        for _ in 0..self.xs.len() {
            let s = BitString::random(params.n, &mut self.rng);
            let sigma = w.eval_ok(self.party, puf, &s).ok_or_else(|| ProtocolError::Abort("own-puf".into()))?;
            let (st, p) = params.main.fe.gen(&sigma, &mut self.rng).map_err(|e| ProtocolError::Abort(e.to_string()))?;
            self.s.push(s);
            self.st.push(st);
            helpers.push(p);
        }
        Ok(CollPrep { puf, helpers })
    }

    fn use_puf_e(&mut self, w: &mut World, params: &ExtParams, puf_e: Sid) -> Result<(), ProtocolError> {
        let qs = self
            .st
            .iter()
            .map(|st| params.code.enc(st).map(Some).map_err(|e| ProtocolError::Abort(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        self.use_puf_e_on(w, params, puf_e, &qs);
        Ok(())
    }

    fn respond(&mut self, _w: &mut World, params: &ExtParams, r: &[BitString]) -> Result<Vec<BitString>, ProtocolError> {
        if r.len() != self.xs.len() || r.iter().any(|ri| ri.len() != params.st_len()) {
            return Err(ProtocolError::Abort("malformed-r".into()));
        }
        self.xs.iter().zip(&self.st).zip(r).map(|((x, st), ri)| Ok(st.xor(&mask(x, ri)?)?)).collect()
    }

    fn open(&mut self, _w: &mut World, _params: &ExtParams, index: usize) -> Option<CollOpening> {
        self.opening_with(index, self.xs.get(index)?.clone())
    }
}

pub struct HonestCollReceiver {
    party: Party,
    masks: UniformMasks<ChaCha20Rng>,
    tq: Option<TestQuery>,
}

impl HonestCollReceiver {
    pub fn new(party: Party, seed: u64) -> Self {
        Self { party, masks: UniformMasks(ChaCha20Rng::seed_from_u64(seed)), tq: None }
    }
}

impl CollReceiver for HonestCollReceiver {
    fn party(&self) -> Party {
        self.party
    }

    fn create_puf_e(&mut self, w: &mut World, params: &ExtParams) -> Result<Sid, ProtocolError> {
        let sid = w.create_honest(self.party, &params.ext.puf)?;
        self.tq = Some(TestQuery::make(w, self.party, sid, &params.ext, &mut self.masks.0)?);
        Ok(sid)
    }

    fn verify_returned(&mut self, w: &mut World, params: &ExtParams, returned: Sid) -> bool {
        self.tq.as_ref().is_some_and(|tq| tq.verify(w, self.party, returned, &params.ext))
    }

    fn choose_r(&mut self, count: usize, len: usize) -> Vec<BitString> {
        self.masks.choose(count, len)
    }
}

pub fn coll_commit(
    w: &mut World,
    params: &ExtParams,
    committer: &mut dyn CollCommitter,
    receiver: &mut dyn CollReceiver,
) -> Result<CollSession, ProtocolError> {
    let start = w.event_count();
    let (s, r) = (committer.party(), receiver.party());
    let count = committer.count();

    let prep = committer.prepare(w, params)?;
    let puf_e_lent = receiver.create_puf_e(w, params)?;

    let transfers = w.exchange(&[(prep.puf, s, r), (puf_e_lent, r, s)], &mut |w, sids| {
        committer.in_transit(w, params, sids)
    })?;
    if !transfers.iter().all(|t| t.delivered) {
        return Err(ProtocolError::Abort("puf-exchange".into()));
    }
    let helper_ok = prep.helpers.len() == count
        && prep.helpers.iter().all(|p| p.sketch.len() == params.main.puf.rg && p.hash_seed.len() == params.main.fe.params().seed_len());
    w.message("commit", s, r, "p", &BitString::concat_all(prep.helpers.iter().map(|p| p.to_bits()).collect::<Vec<_>>().iter()));
    if !helper_ok {
        return Err(ProtocolError::Abort("malformed-p".into()));
    }

    committer.use_puf_e(w, params, puf_e_lent)?;
    let returned = committer.returned_puf(puf_e_lent);
    let back = w.exchange(&[(returned, s, r)], &mut |w, sids| committer.in_transit(w, params, sids))?;
    if !back[0].delivered {
        return Err(ProtocolError::Abort("puf-e-return".into()));
    }
    if !receiver.verify_returned(w, params, returned) {
        return Err(ProtocolError::TqFail);
    }

    let rs = receiver.choose_r(count, params.st_len());
    w.message("commit", r, s, "r", &BitString::concat_all(&rs));
    let cs = committer.respond(w, params, &rs)?;
    w.message("commit", s, r, "c", &BitString::concat_all(&cs));
    if cs.len() != count || cs.iter().any(|c| c.len() != params.st_len()) {
        return Err(ProtocolError::Abort("malformed-c".into()));
    }
    Ok(CollSession {
        committer: s,
        receiver: r,
        count,
        puf: prep.puf,
        helpers: prep.helpers,
        puf_e_lent,
        puf_e: returned,
        r: rs,
        c: cs,
        commit_events: start..w.event_count(),
    })
}

/// Decommit phase for one index: the committer's opening, checked by the receiver.
pub fn coll_open(
    w: &mut World,
    params: &ExtParams,
    session: &CollSession,
    committer: &mut dyn CollCommitter,
    index: usize,
) -> Verdict {
    match committer.open(w, params, index) {
        Some(o) => {
            w.message("decommit", session.committer, session.receiver, "open", &o.to_bits());
            coll_verify(w, params, session, &o)
        }
        None => Verdict::Reject("no-opening".into()),
    }
}

/// The receiver's checks on an opening.
pub fn coll_verify(w: &mut World, params: &ExtParams, session: &CollSession, o: &CollOpening) -> Verdict {
    let me = session.receiver;
    let i = o.index;
    if i >= session.count {
        return Verdict::Reject("index".into());
    }
    if o.s.len() != params.n || o.x.len() != params.k || o.st_e.len() != params.ext.out_len() {
        return Verdict::Reject("malformed-opening".into());
    }
    let Some(sigma) = w.eval_ok(me, session.puf, &o.s) else {
        return Verdict::Reject("puf-eval".into());
    };
    let Ok(st) = params.main.fe.rep(&sigma, &session.helpers[i]) else {
        return Verdict::Reject("rep".into());
    };
    let expected = mask(&o.x, &session.r[i]).and_then(|m| st.xor(&m));
    if expected.as_ref() != Ok(&session.c[i]) {
        return Verdict::Reject("c-mismatch".into());
    }
    let Ok(q) = params.code.enc(&st) else {
        return Verdict::Reject("enc".into());
    };
    let st_e = w.eval_ok(me, session.puf_e, &q).and_then(|sigma_e| params.ext.fe.rep(&sigma_e, &o.p_e).ok());
    if st_e.as_ref() != Some(&o.st_e) {
        return Verdict::Reject("st-e-mismatch".into());
    }
    Verdict::Accept(o.x.clone())
}

/// Single-string commitment: the collective commitment with `N = 1`.
pub fn extpuf_commit(
    w: &mut World,
    params: &ExtParams,
    committer: &mut dyn CollCommitter,
    receiver: &mut dyn CollReceiver,
) -> Result<CollSession, ProtocolError> {
    if committer.count() != 1 {
        return Err(ProtocolError::Params("single-string commitment takes exactly one string".into()));
    }
    coll_commit(w, params, committer, receiver)
}

pub fn extpuf_decommit(
    w: &mut World,
    params: &ExtParams,
    session: &CollSession,
    committer: &mut dyn CollCommitter,
) -> Verdict {
    coll_open(w, params, session, committer, 0)
}
