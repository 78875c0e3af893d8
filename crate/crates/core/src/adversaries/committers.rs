//! Deviating committers for the single-string and collective commitments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::fuzzyext::HelperData;
use crate::pufmodel::programs::Leaker;
use crate::protocols::{
    CollCommitter, CollOpening, CollPrep, EvalOutcome, ExtParams, HonestCollCommitter, ProtocolError, World,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CommitterKind {
    Honest,
    /// Commits honestly, opens every index to a fresh value `x' != x`.
    RandomDecommit,
    /// Tries the original attack after `PUF_E` is back with the receiver:
    /// queries `Enc(st XOR r)` once `r` is known.
    PostReturnQuery,
    /// Adds a query `Enc(st XOR u)` for random `u` while holding `PUF_E`.
    ExtraQuery,
    /// Queries `Enc(st)` with a few flipped bits instead of `Enc(st)`.
    NoisyQuery,
    /// Never queries `PUF_E`.
    NonQuerying,
    /// Hands back a PUF of its own instead of `PUF_E`.
    PufSubstituter,
    /// As the adversary, queries `PUF_E` while it is in transit.
    TransitQuerier,
    /// Its own PUF forwards every query to its creator; also pushes creator messages into it.
    OutgoingProber,
    /// Prepares a second challenge per index, queries `PUF_E` for both, opens the second to `x' != x`.
    Equivocator,
}

impl CommitterKind {
    pub const ALL: [CommitterKind; 10] = [
        CommitterKind::Honest,
        CommitterKind::RandomDecommit,
        CommitterKind::PostReturnQuery,
        CommitterKind::ExtraQuery,
        CommitterKind::NoisyQuery,
        CommitterKind::NonQuerying,
        CommitterKind::PufSubstituter,
        CommitterKind::TransitQuerier,
        CommitterKind::OutgoingProber,
        CommitterKind::Equivocator,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CommitterKind::Honest => "honest-committer",
            CommitterKind::RandomDecommit => "random-decommit",
            CommitterKind::PostReturnQuery => "post-return-query",
            CommitterKind::ExtraQuery => "extra-query",
            CommitterKind::NoisyQuery => "noisy-query",
            CommitterKind::NonQuerying => "non-querying",
            CommitterKind::PufSubstituter => "puf-substituter",
            CommitterKind::TransitQuerier => "transit-querier",
            CommitterKind::OutgoingProber => "outgoing-prober",
            CommitterKind::Equivocator => "equivocator",
        }
    }
}

struct Second {
    s: BitString,
    st_e: BitString,
    p_e: HelperData,
}

/// A committer from the zoo, built around an honest one.
pub struct ZooCommitter {
    kind: CommitterKind,
    honest: HonestCollCommitter,
    rng: ChaCha20Rng,
    puf_e: Option<Sid>,
    substitute: Option<Sid>,
    seconds: Vec<Second>,
    /// Post-return `PUF_E` queries the functionality refused to answer.
    pub dropped_queries: usize,
    /// Post-return `PUF_E` queries that were answered; must stay zero.
    pub answered_queries: usize,
    /// Outgoing messages received from its own PUF.
    pub outmsgs: usize,
}

impl ZooCommitter {
    pub fn new(kind: CommitterKind, party: Party, xs: Vec<BitString>, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let honest = HonestCollCommitter::new(party, xs, rng.random());
        Self {
            kind,
            honest,
            rng,
            puf_e: None,
            substitute: None,
            seconds: Vec::new(),
            dropped_queries: 0,
            answered_queries: 0,
            outmsgs: 0,
        }
    }

    pub fn kind(&self) -> CommitterKind {
        self.kind
    }

    pub fn values(&self) -> &[BitString] {
        self.honest.values()
    }

    fn other_value(&mut self, x: &BitString) -> BitString {
        loop {
            let y = BitString::random(x.len(), &mut self.rng);
            if &y != x {
                return y;
            }
        }
    }

    fn enc(params: &ExtParams, st: &BitString) -> Result<BitString, ProtocolError> {
        params.code.enc(st).map_err(|e| ProtocolError::Abort(e.to_string()))
    }
}

impl CollCommitter for ZooCommitter {
    fn party(&self) -> Party {
        self.honest.party()
    }

    fn count(&self) -> usize {
        self.honest.count()
    }

    fn prepare(&mut self, w: &mut World, params: &ExtParams) -> Result<CollPrep, ProtocolError> {
        if self.kind != CommitterKind::OutgoingProber {
            return self.honest.prepare(w, params);
        }
        // Same steps as the honest committer, over a leaking PUF.
        let me = self.party();
        let puf = w.create_malicious(me, std::sync::Arc::new(Leaker), &params.main.puf)?;
        let mut helpers = Vec::new();
        let mut s_list = Vec::new();
        let mut st_list = Vec::new();
        for _ in 0..self.count() {
            let s = BitString::random(params.n, &mut self.rng);
            let sigma = w.eval_ok(me, puf, &s).ok_or_else(|| ProtocolError::Abort("own-puf".into()))?;
            let (st, p) = params.main.fe.gen(&sigma, &mut self.rng).map_err(|e| ProtocolError::Abort(e.to_string()))?;
            s_list.push(s);
            st_list.push(st);
            helpers.push(p);
        }
        self.honest.replace_preparation(puf, s_list, st_list);
        Ok(CollPrep { puf, helpers })
    }

    fn use_puf_e(&mut self, w: &mut World, params: &ExtParams, puf_e: Sid) -> Result<(), ProtocolError> {
        self.puf_e = Some(puf_e);
        let me = self.party();
        let honest_queries = self
            .honest
            .st()
            .iter()
            .map(|st| Self::enc(params, st))
            .collect::<Result<Vec<_>, _>>()?;
        match self.kind {
            CommitterKind::NonQuerying => {
                self.honest.use_puf_e_on(w, params, puf_e, &vec![None; honest_queries.len()]);
            }
            CommitterKind::NoisyQuery => {
                let radius = params.ext.puf.d_min.saturating_sub(1).max(1);
                let qs: Vec<_> = honest_queries
                    .iter()
                    .map(|q| {
                        let mut q = q.clone();
                        let flips = self.rng.random_range(1..=radius);
                        for p in rand::seq::index::sample(&mut self.rng, q.len(), flips) {
                            q.flip(p);
                        }
                        Some(q)
                    })
                    .collect();
                self.honest.use_puf_e_on(w, params, puf_e, &qs);
            }
            CommitterKind::ExtraQuery => {
                self.honest.use_puf_e_on(w, params, puf_e, &honest_queries.iter().cloned().map(Some).collect::<Vec<_>>());
                for st in self.honest.st().to_vec() {
                    let u = BitString::random(st.len(), &mut self.rng);
                    let q = Self::enc(params, &st.xor(&u)?)?;
                    w.eval_ok(me, puf_e, &q);
                }
            }
            CommitterKind::Equivocator => {
                self.honest.use_puf_e_on(w, params, puf_e, &honest_queries.iter().cloned().map(Some).collect::<Vec<_>>());
                let puf = self.honest.puf().ok_or_else(|| ProtocolError::Abort("no-puf".into()))?;
                for _ in 0..self.count() {
                    let s = BitString::random(params.n, &mut self.rng);
                    let sigma = w.eval_ok(me, puf, &s).ok_or_else(|| ProtocolError::Abort("own-puf".into()))?;
                    let (st2, _) = params.main.fe.gen(&sigma, &mut self.rng).map_err(|e| ProtocolError::Abort(e.to_string()))?;
                    let gen = w
                        .eval_ok(me, puf_e, &Self::enc(params, &st2)?)
                        .and_then(|sig_e| params.ext.fe.gen(&sig_e, &mut self.rng).ok());
                    let (st_e, p_e) = gen.unwrap_or_else(|| {
                        (BitString::zeros(params.ext.out_len()), HelperData::zero(params.ext.fe.params()))
                    });
                    self.seconds.push(Second { s, st_e, p_e });
                }
            }
            CommitterKind::PufSubstituter => {
                self.honest.use_puf_e(w, params, puf_e)?;
                self.substitute = Some(w.create_honest(me, &params.ext.puf)?);
            }
            _ => self.honest.use_puf_e(w, params, puf_e)?,
        }
        Ok(())
    }

    fn returned_puf(&mut self, puf_e: Sid) -> Sid {
        self.substitute.unwrap_or(puf_e)
    }

    fn in_transit(&mut self, w: &mut World, params: &ExtParams, sids: &[Sid]) {
        if self.kind != CommitterKind::TransitQuerier {
            return;
        }
        let own = self.honest.puf();
        for &sid in sids.iter().filter(|&&s| Some(s) != own) {
            let Some(st) = self.honest.st().first().cloned() else { continue };
            if let Ok(q) = Self::enc(params, &st) {
                let _ = w.eval(crate::functionality::Party::Adversary, sid, &q);
            }
            let noise = BitString::random(params.ext.puf.n, &mut self.rng);
            let _ = w.eval(crate::functionality::Party::Adversary, sid, &noise);
        }
    }

    fn respond(&mut self, w: &mut World, params: &ExtParams, r: &[BitString]) -> Result<Vec<BitString>, ProtocolError> {
        let me = self.party();
        if self.kind == CommitterKind::PostReturnQuery {
            if let Some(puf_e) = self.puf_e {
                for (st, ri) in self.honest.st().to_vec().iter().zip(r) {
                    let q = Self::enc(params, &st.xor(ri)?)?;
                    match w.eval(me, puf_e, &q)? {
                        EvalOutcome::Dropped => self.dropped_queries += 1,
                        EvalOutcome::Response(_) => self.answered_queries += 1,
                    }
                }
            }
        }
        if self.kind == CommitterKind::OutgoingProber {
            if let Some(puf) = self.honest.puf() {
                let probe = BitString::ones(8);
                if w.in_msg(me, puf, &probe)?.is_some() {
                    self.outmsgs += 1;
                }
            }
        }
        self.honest.respond(w, params, r)
    }

    fn open(&mut self, w: &mut World, params: &ExtParams, index: usize) -> Option<CollOpening> {
        match self.kind {
            CommitterKind::RandomDecommit => {
                let x = self.honest.values().get(index)?.clone();
                let y = self.other_value(&x);
                self.honest.opening_with(index, y)
            }
            CommitterKind::Equivocator => {
                let x = self.honest.values().get(index)?.clone();
                let y = self.other_value(&x);
                let second = self.seconds.get(index)?;
                Some(CollOpening { index, s: second.s.clone(), x: y, st_e: second.st_e.clone(), p_e: second.p_e.clone() })
            }
            _ => self.honest.open(w, params, index),
        }
    }
}
