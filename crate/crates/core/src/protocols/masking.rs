//! The `x^l AND r` masking shared by all commitment variants.
//!
//! Bit `j` of a `k`-bit string `x` is spread over the positions
//! `I_j = {j, j + k, ..., j + (l-1)k}` (0-based) of a `k*l`-bit string.

use crate::bitlab::{BitError, BitString};

/// `x` repeated `reps` times: position `p` carries `x[p mod k]`.
pub fn spread(x: &BitString, reps: usize) -> BitString {
    let k = x.len();
    let mut out = BitString::zeros(k * reps);
    for j in (0..k).filter(|&j| x.get(j)) {
        for t in 0..reps {
            out.set(j + t * k, true);
        }
    }
    out
}

/// `x^l AND r` with `l = |r| / |x|`.
pub fn mask(x: &BitString, r: &BitString) -> Result<BitString, BitError> {
    let k = x.len();
    if k == 0 || !r.len().is_multiple_of(k) {
        return Err(BitError::LenMismatch { left: k, right: r.len() });
    }
    spread(x, r.len() / k).and(r)
}

/// Positions of `I_j` in a string of `k * reps` bits.
pub fn index_set(j: usize, k: usize, reps: usize) -> impl Iterator<Item = usize> {
    (0..reps).map(move |t| j + t * k)
}

/// `bits` restricted to `I_j`.
pub fn restrict(bits: &BitString, j: usize, k: usize) -> BitString {
    let reps = bits.len() / k;
    BitString::from_bits(&index_set(j, k, reps).map(|p| bits.get(p)).collect::<Vec<_>>())
}
