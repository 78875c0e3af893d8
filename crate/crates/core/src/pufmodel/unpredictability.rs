use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{sample_puf, PufError, PufParams};
use crate::bitlab::{hamming_distance, BitString};
use crate::seeds::derive_seed;

/// Largest response length the empirical estimator accepts.
pub const MAX_ESTIMATOR_RG: usize = 16;

/// Bits of the query responses used as conditioning side information.
pub const CONDITION_BITS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum UnpredictabilityOutcome {
    /// Max-likelihood estimate of `H(PUF(s) | f(PUF(q)))` where `f` keeps the
    /// first [`CONDITION_BITS`] bits of the concatenated query responses.
    Estimated { entropy_bits: f64, samples: u64, clears_m: bool },
    /// `d_min = n + 1` leaves no admissible query list; the property holds trivially.
    Vacuous,
}

/// Default sample budget: `2^(rg + 6)` per conditioning cell.
pub fn default_samples(params: &PufParams, queries: usize) -> u64 {
    let cond = if queries == 0 { 0 } else { CONDITION_BITS.min(queries * params.rg) };
    1u64 << (params.rg + 6 + cond)
}

/// Estimates how unpredictable the response to `challenge` is given responses
/// to the non-adaptive list `queries`, over freshly manufactured PUFs.
pub fn estimate_unpredictability(
    params: &PufParams,
    challenge: &BitString,
    queries: &[BitString],
    samples: u64,
    seed: u64,
) -> Result<UnpredictabilityOutcome, PufError> {
    params.validate()?;
    if params.rg > MAX_ESTIMATOR_RG {
        return Err(PufError::Params(format!("estimator supports rg <= {MAX_ESTIMATOR_RG}, got {}", params.rg)));
    }
    if params.d_min == params.n + 1 {
        return Ok(UnpredictabilityOutcome::Vacuous);
    }
    if challenge.len() != params.n {
        return Err(PufError::ChallengeLength { expected: params.n, got: challenge.len() });
    }
    for q in queries {
        let d = hamming_distance(q, challenge).map_err(|_| PufError::ChallengeLength { expected: params.n, got: q.len() })?;
        if d < params.d_min {
            return Err(PufError::PreconditionUnmet(format!("query at distance {d} < d_min {}", params.d_min)));
        }
    }
    if samples == 0 {
        return Err(PufError::Params("sample count must be positive".into()));
    }
    let cond_bits = if queries.is_empty() { 0 } else { CONDITION_BITS.min(queries.len() * params.rg) };
    let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for t in 0..samples {
        let puf = sample_puf(params, derive_seed(seed, "unpredictability-puf", t))?;
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "unpredictability-noise", t));
        let x = puf.eval(challenge, &mut rng)?.to_u64();
        let mut side = 0u64;
        let mut filled = 0;
        'outer: for q in queries {
            let r = puf.eval(q, &mut rng)?;
            for b in r.iter() {
                if filled == cond_bits {
                    break 'outer;
                }
                side |= (b as u64) << filled;
                filled += 1;
            }
        }
        *counts.entry((side, x)).or_default() += 1;
    }
    let mut best: BTreeMap<u64, u64> = BTreeMap::new();
    for (&(side, _), &c) in &counts {
        let e = best.entry(side).or_default();
        *e = (*e).max(c);
    }
    let guess: u64 = best.values().sum();
    let entropy_bits = -((guess as f64) / samples as f64).log2();
    Ok(UnpredictabilityOutcome::Estimated { entropy_bits, samples, clears_m: entropy_bits >= params.m as f64 })
}
