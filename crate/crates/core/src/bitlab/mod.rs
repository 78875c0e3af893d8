//! Bit strings, Hamming geometry and min-entropy bookkeeping.

mod bitstring;
mod entropy;
mod lemmas;

use thiserror::Error;

pub use bitstring::{hamming_distance, BitString};
pub use entropy::{
    avg_min_entropy, max_entropy, min_entropy, neighborhood_fraction, neighborhood_size, statistical_distance,
    JointDistribution, MASS_TOLERANCE,
};
pub use lemmas::{check_entropy_lemmas, check_neighborhood_lemma, Lemma, LemmaReport, LemmaTally, LEMMA_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BitError {
    #[error("LEN_MISMATCH: {left} vs {right} bits")]
    LenMismatch { left: usize, right: usize },
    #[error("SUPPORT_MISMATCH: {left} vs {right} outcomes")]
    SupportMismatch { left: usize, right: usize },
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}
