//! Single trials of the PUF, extractor and code property experiments.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bitlab::{hamming_distance, BitString};
use crate::ecc::RepetitionCode;
use crate::functionality::{RECEIVER, SENDER};
use crate::fuzzyext::{FuzzyExtractor, HelperData};
use crate::protocols::{standard_world, Bundle, ProtocolError, TestQuery};
use crate::pufmodel::sample_puf;
use crate::seeds::derive_seed;

fn rng_for(seed: u64, label: &str) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, label, 0))
}

/// `s` with exactly `d` positions flipped.
pub fn at_distance<R: Rng + ?Sized>(s: &BitString, d: usize, rng: &mut R) -> BitString {
    let mut q = s.clone();
    for i in index::sample(rng, s.len(), d.min(s.len())) {
        q.flip(i);
    }
    q
}

/// Gen on a random source, Rep after flipping a uniformly chosen number
/// `0..=t` of random positions.
pub fn fe_round_trip(fe: &FuzzyExtractor, seed: u64) -> bool {
    let mut rng = rng_for(seed, "fe");
    let p = fe.params();
    let w = BitString::random(p.source_len, &mut rng);
    let Ok((st, helper)) = fe.gen(&w, &mut rng) else {
        return false;
    };
    let flips = rng.random_range(0..=p.t);
    let w2 = at_distance(&w, flips, &mut rng);
    fe.rep(&w2, &helper).is_ok_and(|st2| st2 == st)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Consistency {
    /// The two responses differ in fewer than `d_noise` bits.
    pub bounded: bool,
    /// Rep on the second response reproduces the key generated from the first.
    pub reproduced: bool,
}

/// Two evaluations of one challenge on a fresh PUF.
pub fn consistency_trial(bundle: &Bundle, seed: u64) -> Result<Consistency, ProtocolError> {
    let mut rng = rng_for(seed, "consistency");
    let puf = sample_puf(&bundle.puf, rng.random()).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let s = BitString::random(bundle.puf.n, &mut rng);
    let eval = |rng: &mut ChaCha20Rng| puf.eval(&s, rng).map_err(|e| ProtocolError::Params(e.to_string()));
    let (a, b) = (eval(&mut rng)?, eval(&mut rng)?);
    let bounded = hamming_distance(&a, &b).is_ok_and(|d| d < bundle.puf.d_noise.max(1));
    let reproduced = match bundle.fe.gen(&a, &mut rng) {
        Ok((st, p)) => bundle.fe.rep(&b, &p).is_ok_and(|st2| st2 == st),
        Err(_) => false,
    };
    Ok(Consistency { bounded, reproduced })
}

/// Fixed challenge and side query of the almost-uniformity experiment.
pub fn uniformity_points(bundle: &Bundle, seed: u64) -> (BitString, BitString) {
    let mut rng = rng_for(seed, "uniformity-points");
    let s = BitString::random(bundle.puf.n, &mut rng);
    let q = at_distance(&s, bundle.puf.d_min, &mut rng);
    (s, q)
}

/// One sample from a fresh PUF, packed as `st || sketch[0] || PUF(q)[0]`.
pub fn uniformity_sample(bundle: &Bundle, s: &BitString, q: &BitString, seed: u64) -> Result<u64, ProtocolError> {
    let mut rng = rng_for(seed, "uniformity");
    let puf = sample_puf(&bundle.puf, rng.random()).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let sigma = puf.eval(s, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let extra = puf.eval(q, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let (st, p) = bundle.fe.gen(&sigma, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let out = st.len();
    Ok(st.to_u64() | (p.sketch.get(0) as u64) << out | (extra.get(0) as u64) << (out + 1))
}

/// Distance between the sampled `(st, side)` histogram and uniform `st`
/// paired with the sampled side-information marginal.
pub fn uniformity_distance(hist: &[u64], out_len: usize) -> f64 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let per_side = 1usize << out_len;
    let mut sd = 0.0;
    for side in hist.chunks(per_side) {
        let marginal: u64 = side.iter().sum();
        let expect = marginal as f64 / per_side as f64;
        sd += side.iter().map(|&c| (c as f64 - expect).abs()).sum::<f64>();
    }
    sd / (2.0 * total as f64)
}

/// Expected distance of an exactly uniform sample of `total` draws over `bins`.
pub fn uniform_noise_floor(bins: usize, total: u64) -> f64 {
    let p = 1.0 / bins as f64;
    0.5 * bins as f64 * (2.0 * p * (1.0 - p) / (std::f64::consts::PI * total as f64)).sqrt()
}

/// Blind baseline for the CQ interaction: `queries` uniform challenges, counted
/// when they land within distance `< d_min` of the secret challenge.
pub fn cq_trial(n: usize, d_min: usize, queries: usize, seed: u64) -> usize {
    let mut rng = rng_for(seed, "cq");
    let s = BitString::random(n, &mut rng);
    (0..queries)
        .filter(|_| hamming_distance(&BitString::random(n, &mut rng), &s).is_ok_and(|d| d < d_min))
        .count()
}

/// One indistinguishability game. The distinguisher queries the PUF at
/// distance exactly `d_min` from `s` and guesses "real" iff Rep there
/// reproduces the string it was given. Returns `(b, guess)`.
pub fn indist_game(bundle: &Bundle, seed: u64) -> Result<(bool, bool), ProtocolError> {
    let mut rng = rng_for(seed, "indist");
    let puf = sample_puf(&bundle.puf, rng.random()).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let s = BitString::random(bundle.puf.n, &mut rng);
    let sigma = puf.eval(&s, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let (st, p) = bundle.fe.gen(&sigma, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let b: bool = rng.random();
    let bs = if b { BitString::random(st.len(), &mut rng) } else { st };

    let q = at_distance(&s, bundle.puf.d_min, &mut rng);
    let near = puf.eval(&q, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let looks_real = bundle.fe.rep(&near, &p).is_ok_and(|x| x == bs);
    Ok((b, !looks_real))
}

/// CRP-guessing adversaries; neither queries within `d_min` of the challenge it outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrpGuesser {
    /// Outputs `(s, Gen(PUF(q)))` for a `q` at distance `d_min` from `s`.
    Neighbor,
    /// Outputs `(s, 0, zero helper)` without any query.
    ZeroHelper,
}

impl CrpGuesser {
    pub const ALL: [CrpGuesser; 2] = [CrpGuesser::Neighbor, CrpGuesser::ZeroHelper];

    pub fn id(self) -> &'static str {
        match self {
            CrpGuesser::Neighbor => "neighbor",
            CrpGuesser::ZeroHelper => "zero-helper",
        }
    }
}

/// Whether the guesser's `(s, st, p)` satisfies `Rep(PUF(s), p) = st`.
pub fn crp_trial(bundle: &Bundle, guesser: CrpGuesser, seed: u64) -> Result<bool, ProtocolError> {
    let mut rng = rng_for(seed, guesser.id());
    let puf = sample_puf(&bundle.puf, rng.random()).map_err(|e| ProtocolError::Params(e.to_string()))?;
    let s = BitString::random(bundle.puf.n, &mut rng);
    let (st, p) = match guesser {
        CrpGuesser::Neighbor => {
            let q = at_distance(&s, bundle.puf.d_min, &mut rng);
            let near = puf.eval(&q, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
            bundle.fe.gen(&near, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?
        }
        CrpGuesser::ZeroHelper => (BitString::zeros(bundle.out_len()), HelperData::zero(bundle.fe.params())),
    };
    let sigma = puf.eval(&s, &mut rng).map_err(|e| ProtocolError::Params(e.to_string()))?;
    Ok(bundle.fe.rep(&sigma, &p).is_ok_and(|x| x == st))
}

/// The creator records a test query, lends its PUF out and checks what comes
/// back. With `substitute` the borrower returns a fresh PUF of the same family.
/// Returns whether the check flagged the returned PUF.
pub fn tq_trial(bundle: &Bundle, substitute: bool, seed: u64) -> Result<bool, ProtocolError> {
    let mut w = standard_world(derive_seed(seed, "world", 0));
    let mut rng = rng_for(seed, "tq");
    let sid = w.create_honest(SENDER, &bundle.puf)?;
    let tq = TestQuery::make(&mut w, SENDER, sid, bundle, &mut rng)?;
    w.exchange_plain(&[(sid, SENDER, RECEIVER)])?;
    let back = if substitute { w.create_honest(RECEIVER, &bundle.puf)? } else { sid };
    w.exchange_plain(&[(back, RECEIVER, SENDER)])?;
    Ok(!tq.verify(&mut w, SENDER, back, bundle))
}

/// Outcome of decoding every codeword under every correctable error pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EccSweep {
    pub codes: u64,
    pub cases: u64,
    pub failures: u64,
}

/// Every message of one repetition code under every error pattern of weight
/// up to the decoding radius. The code length must stay below 64.
pub fn ecc_sweep(msg_len: usize, factor: usize) -> EccSweep {
    let Ok(code) = RepetitionCode::new(msg_len, factor) else {
        return EccSweep::default();
    };
    let l = msg_len * factor;
    let mut sweep = EccSweep { codes: 1, ..Default::default() };
    for m in 0..1u64 << msg_len {
        let msg = BitString::from_u64(m, msg_len);
        let cw = code.enc(&msg).expect("message length matches");
        for weight in 0..=code.correctable().min(l) {
            for_each_pattern(l, weight, |e| {
                sweep.cases += 1;
                let noisy = cw.xor(&BitString::from_u64(e, l)).expect("same length");
                if code.dec(&noisy).ok().as_ref() != Some(&msg) {
                    sweep.failures += 1;
                }
            });
        }
    }
    sweep
}

/// `(msg_len, factor)` of every odd-factor repetition code with length in `1..=max_len`.
pub fn small_codes(max_len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for factor in (1..=max_len).step_by(2) {
        for msg_len in 1..=max_len / factor {
            out.push((msg_len, factor));
        }
    }
    out
}

/// Calls `f` on every `len`-bit mask of popcount `weight`.
fn for_each_pattern(len: usize, weight: usize, mut f: impl FnMut(u64)) {
    if weight == 0 {
        f(0);
        return;
    }
    if weight > len {
        return;
    }
    let limit = 1u64 << len;
    let mut v = (1u64 << weight) - 1;
    while v < limit {
        f(v);
        // next mask with the same popcount
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns_enumerate_binomials() {
        for len in 0..10 {
            for w in 0..=len {
                let mut seen = Vec::new();
                for_each_pattern(len, w, |m| seen.push(m));
                let expect: Vec<u64> = (0..1u64 << len).filter(|m| m.count_ones() as usize == w).collect();
                assert_eq!(seen, expect, "len {len} weight {w}");
            }
        }
    }

    #[test]
    fn uniform_histogram_has_zero_distance() {
        assert_eq!(uniformity_distance(&[5, 5, 5, 5, 2, 2, 2, 2], 2), 0.0);
        // all mass on one st value: half of each side block is off by (1 - 1/2)
        assert!((uniformity_distance(&[4, 0, 4, 0], 1) - 0.5).abs() < 1e-12);
    }
}
