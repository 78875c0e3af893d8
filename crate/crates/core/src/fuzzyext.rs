//! Code-offset fuzzy extractor with a Toeplitz-matrix universal hash.
//!
//! `gen(w)` publishes `w XOR C(m)` for a random message `m` of a repetition
//! code correcting `t` errors per block, together with a random hash seed.
//! Given the sketch, `w` and `m` determine each other, and the key is the hash
//! of `m` under `[I | T]` with `T` Toeplitz. `rep(w', p)` decodes
//! `w' XOR sketch` back to `m` and rehashes.
//!
//! The identity block keeps the hash full rank for every seed. A plain
//! Toeplitz hash of `w` has seeds (all zeros, say) under which the key no
//! longer depends on the PUF, and the helper data of the extraction PUF is
//! chosen by the committer.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitlab::{BitError, BitString};
use crate::ecc::{EccError, RepetitionCode};
use crate::pufmodel::PufParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeError {
    #[error("invalid fuzzy extractor parameters: {0}")]
    Params(String),
    #[error("LEN_MISMATCH: expected {expected} source bits, got {got}")]
    LenMismatch { expected: usize, got: usize },
    #[error("helper data has the wrong shape")]
    HelperShape,
}

impl From<EccError> for FeError {
    fn from(e: EccError) -> Self {
        FeError::Params(e.to_string())
    }
}

impl From<BitError> for FeError {
    fn from(e: BitError) -> Self {
        FeError::Params(e.to_string())
    }
}

/// `(source_len, m_req, out_len, t, eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeParams {
    pub source_len: usize,
    pub m_req: usize,
    pub out_len: usize,
    pub t: usize,
    pub eps: f64,
}

impl FeParams {
    /// Parameters sized so that `margin` spare message bits remain after extracting `out_len` bits.
    pub fn sized(out_len: usize, t: usize, margin: usize) -> Self {
        let block = 2 * t + 1;
        let source_len = block * (out_len + margin);
        Self { source_len, m_req: source_len - margin / 2, out_len, t, eps: 2f64.powi(-((margin / 2) as i32)) }
    }

    pub fn block_len(&self) -> usize {
        2 * self.t + 1
    }

    pub fn message_bits(&self) -> usize {
        self.source_len / self.block_len()
    }

    pub fn seed_len(&self) -> usize {
        self.message_bits() + self.out_len - 1
    }

    pub fn validate(&self) -> Result<(), FeError> {
        if self.source_len == 0 || !self.source_len.is_multiple_of(self.block_len()) {
            return Err(FeError::Params(format!(
                "source length {} is not a positive multiple of the block length {}",
                self.source_len,
                self.block_len()
            )));
        }
        if self.out_len == 0 || self.out_len >= self.source_len {
            return Err(FeError::Params(format!(
                "output length {} must be positive and shorter than the source ({})",
                self.out_len, self.source_len
            )));
        }
        if self.out_len > self.message_bits() {
            return Err(FeError::Params(format!(
                "output length {} exceeds the {} bits of entropy left after the sketch",
                self.out_len,
                self.message_bits()
            )));
        }
        if self.m_req == 0 || self.m_req > self.source_len {
            return Err(FeError::Params(format!("m_req {} outside 1..={}", self.m_req, self.source_len)));
        }
        Ok(())
    }
}

/// Public helper string `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HelperData {
    pub sketch: BitString,
    pub hash_seed: BitString,
}

impl HelperData {
    /// All-zero helper of the right shape, used when a PUF aborts.
    pub fn zero(params: &FeParams) -> Self {
        Self { sketch: BitString::zeros(params.source_len), hash_seed: BitString::zeros(params.seed_len()) }
    }

    pub fn to_bits(&self) -> BitString {
        self.sketch.concat(&self.hash_seed)
    }

    pub fn bit_len(params: &FeParams) -> usize {
        params.source_len + params.seed_len()
    }

    pub fn from_bits(bits: &BitString, params: &FeParams) -> Result<Self, FeError> {
        if bits.len() != Self::bit_len(params) {
            return Err(FeError::HelperShape);
        }
        Ok(Self {
            sketch: bits.slice(0, params.source_len),
            hash_seed: bits.slice(params.source_len, params.seed_len()),
        })
    }

    fn matches(&self, params: &FeParams) -> bool {
        self.sketch.len() == params.source_len && self.hash_seed.len() == params.seed_len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyExtractor {
    params: FeParams,
    code: RepetitionCode,
}

impl FuzzyExtractor {
    pub fn new(params: FeParams) -> Result<Self, FeError> {
        params.validate()?;
        let code = RepetitionCode::new(params.message_bits(), params.block_len())?;
        Ok(Self { params, code })
    }

    pub fn params(&self) -> &FeParams {
        &self.params
    }

    pub fn gen<R: Rng + ?Sized>(&self, w: &BitString, rng: &mut R) -> Result<(BitString, HelperData), FeError> {
        self.check_source(w)?;
        let m = BitString::random(self.params.message_bits(), rng);
        let c = self.code.enc(&m)?;
        let sketch = w.xor(&c)?;
        let hash_seed = BitString::random(self.params.seed_len(), rng);
        let st = self.hash(&hash_seed, &m);
        Ok((st, HelperData { sketch, hash_seed }))
    }

    pub fn rep(&self, w: &BitString, p: &HelperData) -> Result<BitString, FeError> {
        self.check_source(w)?;
        if !p.matches(&self.params) {
            return Err(FeError::HelperShape);
        }
        let m = self.code.dec(&w.xor(&p.sketch)?)?;
        Ok(self.hash(&p.hash_seed, &m))
    }

    fn check_source(&self, w: &BitString) -> Result<(), FeError> {
        if w.len() != self.params.source_len {
            return Err(FeError::LenMismatch { expected: self.params.source_len, got: w.len() });
        }
        Ok(())
    }

    /// `m[..out] XOR T m[out..] XOR b`, with `T` and `b` as in [`toeplitz_hash`].
    fn hash(&self, seed: &BitString, m: &BitString) -> BitString {
        let out = self.params.out_len;
        let rest = m.slice(out, m.len() - out);
        toeplitz_hash(seed, &rest, out).xor(&m.slice(0, out)).expect("both out_len bits")
    }
}

/// `T w XOR b` to `out_len` bits, where the rows of the Toeplitz matrix `T` are
/// windows of the seed's first `w.len() + out_len - 1` bits and `b` is the
/// trailing `out_len` bits.
pub fn toeplitz_hash(seed: &BitString, w: &BitString, out_len: usize) -> BitString {
    let diag_len = w.len() + out_len - 1;
    assert_eq!(seed.len(), diag_len + out_len, "seed length");
    let out_words = out_len.div_ceil(64);
    let mut acc: Vec<u64> = (0..out_words).map(|i| seed.word_at(diag_len + 64 * i)).collect();
    // Input bit j adds the seed window starting at j.
    for j in w.positions() {
        for (i, a) in acc.iter_mut().enumerate() {
            *a ^= seed.word_at(j + 64 * i);
        }
    }
    BitString::from_words(out_len, acc)
}

/// True when the extractor is built for this PUF family: same source length,
/// enough error tolerance for its noise, and the entropy it assumes.
pub fn check_matching(fe: &FeParams, puf: &PufParams) -> bool {
    fe.t >= puf.d_noise && fe.m_req == puf.m && fe.source_len == puf.rg
}
