//! Binary repetition codes.
//!
//! Layout is bit-major: message bit `i` occupies codeword positions
//! `i*r .. (i+1)*r`, so `enc(10)` with `r = 3` is `111000`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitlab::BitString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EccError {
    #[error("repetition factor must be odd and positive, got {0}")]
    Factor(usize),
    #[error("LEN_MISMATCH: expected {expected} bits, got {got}")]
    LenMismatch { expected: usize, got: usize },
}

/// `(N, L, D)`: message length, code length, minimum distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EccParams {
    pub msg_len: usize,
    pub code_len: usize,
    pub distance: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionCode {
    msg_len: usize,
    factor: usize,
}

impl RepetitionCode {
    pub fn new(msg_len: usize, factor: usize) -> Result<Self, EccError> {
        if factor == 0 || factor.is_multiple_of(2) {
            return Err(EccError::Factor(factor));
        }
        Ok(Self { msg_len, factor })
    }

    /// Code of distance `2 * d - 1`, which decodes to the same message for any
    /// two words within distance `d - 1` of one codeword.
    pub fn with_min_distance_radius(msg_len: usize, d: usize) -> Result<Self, EccError> {
        Self::new(msg_len, 2 * d.max(1) - 1)
    }

    pub fn params(&self) -> EccParams {
        EccParams { msg_len: self.msg_len, code_len: self.msg_len * self.factor, distance: self.factor }
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Errors per block the decoder always corrects.
    pub fn correctable(&self) -> usize {
        (self.factor - 1) / 2
    }

    pub fn enc(&self, m: &BitString) -> Result<BitString, EccError> {
        if m.len() != self.msg_len {
            return Err(EccError::LenMismatch { expected: self.msg_len, got: m.len() });
        }
        let mut out = BitString::zeros(self.msg_len * self.factor);
        for (i, b) in m.iter().enumerate() {
            if b {
                for j in 0..self.factor {
                    out.set(i * self.factor + j, true);
                }
            }
        }
        Ok(out)
    }

    /// Majority decoding per block.
    pub fn dec(&self, w: &BitString) -> Result<BitString, EccError> {
        let l = self.msg_len * self.factor;
        if w.len() != l {
            return Err(EccError::LenMismatch { expected: l, got: w.len() });
        }
        let mut out = BitString::zeros(self.msg_len);
        for i in 0..self.msg_len {
            let ones = if self.factor <= 64 {
                let mask = u64::MAX >> (64 - self.factor);
                (w.word_at(i * self.factor) & mask).count_ones() as usize
            } else {
                w.slice(i * self.factor, self.factor).count_ones()
            };
            out.set(i, 2 * ones > self.factor);
        }
        Ok(out)
    }
}
