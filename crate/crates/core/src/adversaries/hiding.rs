//! Baseline distinguishers against the commit-phase view of the receiver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bitlab::{hamming_distance, BitString};
use crate::functionality::{Party, Sid, RECEIVER, SENDER};
use crate::fuzzyext::{FuzzyExtractor, HelperData};
use crate::protocols::masking::mask;
use crate::protocols::{
    coll_commit, cpuf_commit, standard_world, CpufParams, DeskConfig, ExtParams, HonestCollCommitter,
    HonestCollReceiver, HonestCpufCommitter, ProtocolError, ProtocolId, UniformMasks, World,
};
use crate::seeds::derive_seed;

/// What an honest receiver holds after the commit phase.
pub struct CommitView {
    pub puf: Sid,
    pub helpers: Vec<HelperData>,
    pub r: Vec<BitString>,
    pub c: Vec<BitString>,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distinguisher {
    /// Majority of `c AND r` over the first string.
    MaskCorrelation,
    /// Parity of the first sketch XOR parity of the first `c`.
    HelperParity,
    /// Queries the PUF on a fresh random challenge, reproduces a key with
    /// the first helper string and picks the value whose masking is closer to `c`.
    PufReplay,
}

impl Distinguisher {
    pub const ALL: [Distinguisher; 3] =
        [Distinguisher::MaskCorrelation, Distinguisher::HelperParity, Distinguisher::PufReplay];

    pub fn id(self) -> &'static str {
        match self {
            Distinguisher::MaskCorrelation => "mask-correlation",
            Distinguisher::HelperParity => "helper-parity",
            Distinguisher::PufReplay => "puf-replay",
        }
    }

    /// Guess of which of `0^k` / `1^k` was committed.
    pub fn guess<R: Rng>(
        self,
        w: &mut World,
        me: Party,
        fe: &FuzzyExtractor,
        n: usize,
        view: &CommitView,
        rng: &mut R,
    ) -> bool {
        let (c, r) = (&view.c[0], &view.r[0]);
        match self {
            Distinguisher::MaskCorrelation => {
                let hits = c.and(r).map(|m| m.count_ones()).unwrap_or(0);
                2 * hits > r.count_ones()
            }
            Distinguisher::HelperParity => (view.helpers[0].sketch.count_ones() + c.count_ones()) % 2 == 1,
            Distinguisher::PufReplay => {
                let s = BitString::random(n, rng);
                let Some(st) = w.eval_ok(me, view.puf, &s).and_then(|sig| fe.rep(&sig, &view.helpers[0]).ok()) else {
                    return rng.random();
                };
                let dist = |x: BitString| {
                    mask(&x, r).and_then(|m| st.xor(&m)).and_then(|e| hamming_distance(&e, c)).unwrap_or(usize::MAX)
                };
                dist(BitString::ones(view.k)) < dist(BitString::zeros(view.k))
            }
        }
    }
}

/// One hiding game: commits to `1^k` if `b` else `0^k` and returns every distinguisher's guess.
pub fn hiding_game(protocol: ProtocolId, cfg: &DeskConfig, b: bool, seed: u64) -> Result<Vec<bool>, ProtocolError> {
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "distinguisher", 0));
    let x = if b { BitString::ones(cfg.k) } else { BitString::zeros(cfg.k) };
    let (view, fe, n) = match protocol {
        ProtocolId::Cpuf => {
            let params = CpufParams::desk(cfg)?;
            let mut s = HonestCpufCommitter::new(SENDER, x, derive_seed(seed, "committer", 0));
            let mut masks = UniformMasks(ChaCha20Rng::seed_from_u64(derive_seed(seed, "receiver", 0)));
            let sess = cpuf_commit(&mut w, &params, &mut s, RECEIVER, &mut masks)?;
            (CommitView { puf: sess.puf, helpers: vec![sess.p], r: vec![sess.r], c: vec![sess.c], k: cfg.k }, params.main.fe, cfg.n)
        }
        ProtocolId::Extpuf | ProtocolId::Collextpuf => {
            let params = ExtParams::desk(cfg)?;
            let count = if protocol == ProtocolId::Extpuf { 1 } else { 4 };
            let mut s = HonestCollCommitter::new(SENDER, vec![x; count], derive_seed(seed, "committer", 0));
            let mut r = HonestCollReceiver::new(RECEIVER, derive_seed(seed, "receiver", 0));
            let sess = coll_commit(&mut w, &params, &mut s, &mut r)?;
            (CommitView { puf: sess.puf, helpers: sess.helpers, r: sess.r, c: sess.c, k: cfg.k }, params.main.fe, cfg.n)
        }
        other => return Err(ProtocolError::Params(format!("no hiding game for {other}"))),
    };
    Ok(Distinguisher::ALL.iter().map(|d| d.guess(&mut w, RECEIVER, &fe, n, &view, &mut rng)).collect())
}
