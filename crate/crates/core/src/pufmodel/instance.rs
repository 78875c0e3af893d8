use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PufError;
use crate::bitlab::BitString;

/// Parameters of a PUF family.
///
/// * `n`: challenge length
/// * `rg`: response length
/// * `d_noise`: two evaluations of one challenge differ in fewer than `d_noise` bits
/// * `d_min`: challenges closer than `d_min` to a target may leak about it
/// * `m`: claimed conditional min-entropy of a response
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PufParams {
    pub n: usize,
    pub rg: usize,
    pub d_noise: usize,
    pub d_min: usize,
    pub m: usize,
}

/// Default unpredictability radius for security parameter `n`.
pub fn default_d_min(n: usize) -> usize {
    (n / 8).max(2)
}

impl PufParams {
    pub fn new(n: usize, rg: usize, d_noise: usize, d_min: usize, m: usize) -> Result<Self, PufError> {
        let p = Self { n, rg, d_noise, d_min, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PufError> {
        if self.n == 0 || self.rg == 0 {
            return Err(PufError::Params("challenge and response lengths must be positive".into()));
        }
        if self.d_noise > self.rg {
            return Err(PufError::Params(format!("d_noise {} exceeds rg {}", self.d_noise, self.rg)));
        }
        if self.d_min == 0 || self.d_min > self.n + 1 {
            return Err(PufError::Params(format!("d_min {} outside 1..={}", self.d_min, self.n + 1)));
        }
        if self.m == 0 || self.m > self.rg {
            return Err(PufError::Params(format!("m {} outside 1..={}", self.m, self.rg)));
        }
        Ok(())
    }

    /// Largest number of bits a single evaluation flips relative to the ideal response.
    pub fn max_flips(&self) -> usize {
        self.d_noise.saturating_sub(1) / 2
    }
}

/// One honestly manufactured PUF: a keyed pseudorandom map from challenges to
/// ideal responses, plus bounded per-evaluation noise.
#[derive(Clone, PartialEq, Eq)]
pub struct PufInstance {
    id: u64,
    params: PufParams,
    key: [u8; 32],
}

impl std::fmt::Debug for PufInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PufInstance").field("id", &self.id).field("params", &self.params).finish_non_exhaustive()
    }
}

/// Manufactures a PUF of family `params` from `seed`.
pub fn sample_puf(params: &PufParams, seed: u64) -> Result<PufInstance, PufError> {
    params.validate()?;
    let mut h = Sha256::new();
    h.update(b"puf-key");
    h.update(seed.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    let id = u64::from_le_bytes(Sha256::digest([b"puf-id".as_slice(), &key].concat())[..8].try_into().expect("32 bytes"));
    Ok(PufInstance { id, params: params.clone(), key })
}

impl PufInstance {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn params(&self) -> &PufParams {
        &self.params
    }

    /// Noise-free response to `s`.
    pub fn ideal(&self, s: &BitString) -> Result<BitString, PufError> {
        self.check_challenge(s)?;
        let input = s.feed_bytes();
        let mut bits = Vec::with_capacity(self.params.rg);
        let mut block = 0u64;
        while bits.len() < self.params.rg {
            let mut h = Sha256::new();
            h.update(self.key);
            h.update(block.to_le_bytes());
            h.update(&input);
            let out = h.finalize();
            for byte in out.iter() {
                for b in 0..8 {
                    if bits.len() < self.params.rg {
                        bits.push((byte >> b) & 1 == 1);
                    }
                }
            }
            block += 1;
        }
        Ok(BitString::from_bits(&bits))
    }

    /// Noisy evaluation: the ideal response with a uniformly chosen number
    /// (at most `max_flips`) of uniformly chosen positions flipped.
    pub fn eval<R: Rng + ?Sized>(&self, s: &BitString, rng: &mut R) -> Result<BitString, PufError> {
        let mut out = self.ideal(s)?;
        let t = self.params.max_flips();
        if t > 0 {
            let flips = rng.random_range(0..=t);
            for pos in index::sample(rng, self.params.rg, flips) {
                out.flip(pos);
            }
        }
        Ok(out)
    }

    fn check_challenge(&self, s: &BitString) -> Result<(), PufError> {
        if s.len() != self.params.n {
            return Err(PufError::ChallengeLength { expected: self.params.n, got: s.len() });
        }
        Ok(())
    }
}
