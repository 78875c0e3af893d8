//! The original two-PUF extractable commitment, in which the committer keeps
//! the receiver's extraction PUF until the decommit phase.
//!
//! Commit phase:
//! 1. `R` creates `PUF_E` with a test query and hands it to `S`;
//! 2. `S` creates `PUF_CS`, `PUF_CR`, draws `s_1, s_2`, computes
//!    `(st_1, p_1) = Gen(PUF_CS(s_1))`, `(st_2, p_2) = Gen(PUF_CR(s_2))`,
//!    `(st_E, p_E) = Gen_E(PUF_E(Enc(st_1)))`, hands over `PUF_CS`, `PUF_CR` and sends `p_1, p_2`;
//! 3. `R` sends `r_1` (`k*l` bits) and `r_2` (`m*l` bits, `m = |st_E || p_E|`);
//! 4. `S` sends `c_1 = st_1 XOR x^l AND r_1` and `c_2 = st_2 XOR (st_E || p_E)^l AND r_2`.
//!
//! Decommit: `S` returns `PUF_E` and sends `(s_1, s_2, x, st_E, p_E)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::masking::mask;
use super::{EventRange, MaskChooser, OriginalParams, ProtocolError, TestQuery, Verdict, World};
use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::fuzzyext::HelperData;

pub struct OriginalSetup {
    pub cs: Sid,
    pub cr: Sid,
    pub p1: HelperData,
    pub p2: HelperData,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OriginalOpening {
    pub s1: BitString,
    pub s2: BitString,
    pub x: BitString,
    pub st_e: BitString,
    pub p_e: HelperData,
}

pub trait OriginalCommitter {
    fn party(&self) -> Party;

    /// Runs while the committer holds `PUF_E`.
    fn setup(&mut self, w: &mut World, params: &OriginalParams, puf_e: Sid) -> Result<OriginalSetup, ProtocolError>;

    /// The committer still holds `PUF_E` here.
    fn respond(
        &mut self,
        w: &mut World,
        params: &OriginalParams,
        r1: &BitString,
        r2: &BitString,
    ) -> Result<(BitString, BitString), ProtocolError>;

    /// PUF handed back as `PUF_E` at the start of the decommit phase.
    fn puf_e_to_return(&self) -> Option<Sid>;

    fn open(&mut self, w: &mut World, params: &OriginalParams) -> Option<OriginalOpening>;
}

pub struct HonestOriginalCommitter {
    party: Party,
    x: BitString,
    rng: ChaCha20Rng,
    puf_e: Option<Sid>,
    s1: Option<BitString>,
    s2: Option<BitString>,
    st1: Option<BitString>,
    st2: Option<BitString>,
    st_e: Option<BitString>,
    p_e: Option<HelperData>,
}

impl HonestOriginalCommitter {
    pub fn new(party: Party, x: BitString, seed: u64) -> Self {
        Self {
            party,
            x,
            rng: ChaCha20Rng::seed_from_u64(seed),
            puf_e: None,
            s1: None,
            s2: None,
            st1: None,
            st2: None,
            st_e: None,
            p_e: None,
        }
    }

    pub fn st1(&self) -> Option<&BitString> {
        self.st1.as_ref()
    }

    pub fn puf_e(&self) -> Option<Sid> {
        self.puf_e
    }
}

impl OriginalCommitter for HonestOriginalCommitter {
    fn party(&self) -> Party {
        self.party
    }

    fn setup(&mut self, w: &mut World, params: &OriginalParams, puf_e: Sid) -> Result<OriginalSetup, ProtocolError> {
        if self.x.len() != params.k {
            return Err(ProtocolError::Params(format!("committed string must have {} bits", params.k)));
        }
        let me = self.party;
        self.puf_e = Some(puf_e);
        let cs = w.create_honest(me, &params.cs.puf)?;
        let cr = w.create_honest(me, &params.cr.puf)?;
        let s1 = BitString::random(params.n, &mut self.rng);
        let s2 = BitString::random(params.n, &mut self.rng);
        let own = || ProtocolError::Abort("own-puf".into());
        let fe_err = |e: crate::fuzzyext::FeError| ProtocolError::Abort(e.to_string());
        let sigma1 = w.eval_ok(me, cs, &s1).ok_or_else(own)?;
        let sigma2 = w.eval_ok(me, cr, &s2).ok_or_else(own)?;
        let (st1, p1) = params.cs.fe.gen(&sigma1, &mut self.rng).map_err(fe_err)?;
        let (st2, p2) = params.cr.fe.gen(&sigma2, &mut self.rng).map_err(fe_err)?;
        let q = params.code.enc(&st1).map_err(|e| ProtocolError::Abort(e.to_string()))?;
        let gen_e = w
            .eval_ok(me, puf_e, &q)
            .filter(|sigma| sigma.len() == params.ext.puf.rg)
            .and_then(|sigma| params.ext.fe.gen(&sigma, &mut self.rng).ok());
        let (st_e, p_e) =
            gen_e.unwrap_or_else(|| (BitString::zeros(params.ext.out_len()), HelperData::zero(params.ext.fe.params())));
        self.s1 = Some(s1);
        self.s2 = Some(s2);
        self.st1 = Some(st1);
        self.st2 = Some(st2);
        self.st_e = Some(st_e);
        self.p_e = Some(p_e);
        Ok(OriginalSetup { cs, cr, p1, p2 })
    }

    fn respond(
        &mut self,
        _w: &mut World,
        params: &OriginalParams,
        r1: &BitString,
        r2: &BitString,
    ) -> Result<(BitString, BitString), ProtocolError> {
        if r1.len() != params.st1_len() || r2.len() != params.m() * params.l {
            return Err(ProtocolError::Abort("malformed-r".into()));
        }
        let missing = || ProtocolError::Abort("respond-before-setup".into());
        let st1 = self.st1.as_ref().ok_or_else(missing)?;
        let st2 = self.st2.as_ref().ok_or_else(missing)?;
        let ext = self.st_e.as_ref().ok_or_else(missing)?.concat(&self.p_e.as_ref().ok_or_else(missing)?.to_bits());
        Ok((st1.xor(&mask(&self.x, r1)?)?, st2.xor(&mask(&ext, r2)?)?))
    }

    fn puf_e_to_return(&self) -> Option<Sid> {
        self.puf_e
    }

    fn open(&mut self, _w: &mut World, _params: &OriginalParams) -> Option<OriginalOpening> {
        Some(OriginalOpening {
            s1: self.s1.clone()?,
            s2: self.s2.clone()?,
            x: self.x.clone(),
            st_e: self.st_e.clone()?,
            p_e: self.p_e.clone()?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct OriginalSession {
    pub committer: Party,
    pub receiver: Party,
    pub puf_e: Sid,
    pub tq: TestQuery,
    pub cs: Sid,
    pub cr: Sid,
    pub p1: HelperData,
    pub p2: HelperData,
    pub r1: BitString,
    pub r2: BitString,
    pub c1: BitString,
    pub c2: BitString,
    pub commit_events: EventRange,
}

pub fn original_commit(
    w: &mut World,
    params: &OriginalParams,
    committer: &mut dyn OriginalCommitter,
    receiver: Party,
    receiver_seed: u64,
    masks: &mut dyn MaskChooser,
) -> Result<OriginalSession, ProtocolError> {
    let start = w.event_count();
    let s = committer.party();
    let mut rng = ChaCha20Rng::seed_from_u64(receiver_seed);
    let puf_e = w.create_honest(receiver, &params.ext.puf)?;
    let tq = TestQuery::make(w, receiver, puf_e, &params.ext, &mut rng)?;
    if !w.exchange_plain(&[(puf_e, receiver, s)])?[0].delivered {
        return Err(ProtocolError::Abort("puf-e-exchange".into()));
    }
    let setup = committer.setup(w, params, puf_e)?;
    let t = w.exchange_plain(&[(setup.cs, s, receiver), (setup.cr, s, receiver)])?;
    if !t.iter().all(|t| t.delivered) {
        return Err(ProtocolError::Abort("puf-exchange".into()));
    }
    w.message("commit", s, receiver, "p1", &setup.p1.to_bits());
    w.message("commit", s, receiver, "p2", &setup.p2.to_bits());
    if setup.p1.sketch.len() != params.cs.puf.rg || setup.p2.sketch.len() != params.cr.puf.rg {
        return Err(ProtocolError::Abort("malformed-p".into()));
    }
    let r1 = masks.choose(1, params.st1_len()).remove(0);
    let r2 = masks.choose(1, params.m() * params.l).remove(0);
    w.message("commit", receiver, s, "r1", &r1);
    w.message("commit", receiver, s, "r2", &r2);
    let (c1, c2) = committer.respond(w, params, &r1, &r2)?;
    w.message("commit", s, receiver, "c1", &c1);
    w.message("commit", s, receiver, "c2", &c2);
    if c1.len() != r1.len() || c2.len() != r2.len() {
        return Err(ProtocolError::Abort("malformed-c".into()));
    }
    Ok(OriginalSession {
        committer: s,
        receiver,
        puf_e,
        tq,
        cs: setup.cs,
        cr: setup.cr,
        p1: setup.p1,
        p2: setup.p2,
        r1,
        r2,
        c1,
        c2,
        commit_events: start..w.event_count(),
    })
}

pub fn original_decommit(
    w: &mut World,
    params: &OriginalParams,
    session: &OriginalSession,
    committer: &mut dyn OriginalCommitter,
) -> Result<Verdict, ProtocolError> {
    let (s, me) = (session.committer, session.receiver);
    let Some(returned) = committer.puf_e_to_return() else {
        return Ok(Verdict::Reject("no-puf-e".into()));
    };
    if !w.exchange_plain(&[(returned, s, me)])?[0].delivered {
        return Ok(Verdict::Reject("puf-e-return".into()));
    }
    let Some(o) = committer.open(w, params) else {
        return Ok(Verdict::Reject("no-opening".into()));
    };
    let payload = BitString::concat_all([&o.s1, &o.s2, &o.x, &o.st_e, &o.p_e.to_bits()]);
    w.message("decommit", s, me, "open", &payload);
    if !session.tq.verify(w, me, returned, &params.ext) {
        return Ok(Verdict::Reject("tq-fail".into()));
    }
    if o.s1.len() != params.n || o.s2.len() != params.n || o.x.len() != params.k || o.st_e.len() != params.ext.out_len()
    {
        return Ok(Verdict::Reject("malformed-opening".into()));
    }
    let st1 = w.eval_ok(me, session.cs, &o.s1).and_then(|sig| params.cs.fe.rep(&sig, &session.p1).ok());
    let second = if params.literal_figure { session.cs } else { session.cr };
    let st2 = w.eval_ok(me, second, &o.s2).and_then(|sig| params.cr.fe.rep(&sig, &session.p2).ok());
    let (Some(st1), Some(st2)) = (st1, st2) else {
        return Ok(Verdict::Reject("rep".into()));
    };
    if mask(&o.x, &session.r1).and_then(|m| st1.xor(&m)).ok() != Some(session.c1.clone()) {
        return Ok(Verdict::Reject("c1-mismatch".into()));
    }
    let ext = o.st_e.concat(&o.p_e.to_bits());
    if mask(&ext, &session.r2).and_then(|m| st2.xor(&m)).ok() != Some(session.c2.clone()) {
        return Ok(Verdict::Reject("c2-mismatch".into()));
    }
    let q = params.code.enc(&st1).map_err(|e| ProtocolError::Abort(e.to_string()))?;
    let st_e = w.eval_ok(me, returned, &q).and_then(|sig| params.ext.fe.rep(&sig, &o.p_e).ok());
    if st_e.as_ref() != Some(&o.st_e) {
        return Ok(Verdict::Reject("st-e-mismatch".into()));
    }
    Ok(Verdict::Accept(o.x))
}
