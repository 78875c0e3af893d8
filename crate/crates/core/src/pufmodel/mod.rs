//! PUF families, honest instances, malicious machines and the unpredictability estimator.

mod instance;
mod machine;
pub mod programs;
mod unpredictability;

use thiserror::Error;

pub use instance::{default_d_min, sample_puf, PufInstance, PufParams};
pub use machine::{step_malicious, InnerOracle, MachineInput, MachineStep, MaliciousPufMachine, PufProgram};
pub use unpredictability::{
    default_samples, estimate_unpredictability, UnpredictabilityOutcome, CONDITION_BITS, MAX_ESTIMATOR_RG,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PufError {
    #[error("invalid PUF parameters: {0}")]
    Params(String),
    #[error("LEN_MISMATCH: challenge has {got} bits, PUF expects {expected}")]
    ChallengeLength { expected: usize, got: usize },
    #[error("STATE_BUDGET: program needs {needed} state bits, budget is {allowed}")]
    StateBudget { needed: usize, allowed: usize },
    #[error("PRECONDITION_UNMET: {0}")]
    PreconditionUnmet(String),
}
