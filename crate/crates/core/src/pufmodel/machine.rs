use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{PufError, PufInstance};
use crate::bitlab::BitString;

/// What a malicious PUF is asked to do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MachineInput<'a> {
    /// An evaluation request by whoever holds the PUF.
    Query(&'a BitString),
    /// A message from the PUF's creator.
    Msg(&'a BitString),
}

impl MachineInput<'_> {
    pub fn kind(&self) -> &'static str {
        match self {
            MachineInput::Query(_) => "query",
            MachineInput::Msg(_) => "msg",
        }
    }

    pub fn payload(&self) -> &BitString {
        match self {
            MachineInput::Query(p) | MachineInput::Msg(p) => p,
        }
    }
}

/// Result of one machine step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MachineStep {
    /// Reply to a query; `None` means the PUF aborts.
    pub response: Option<BitString>,
    /// Message the machine wants delivered to its creator.
    pub outgoing: Option<BitString>,
    pub state: BitString,
}

/// Evaluation access to the honest PUF embedded in a malicious machine.
pub trait InnerOracle {
    fn query(&mut self, s: &BitString) -> Option<BitString>;
}

/// Code loaded into a malicious PUF. Programs are immutable; the machine threads their state.
pub trait PufProgram: Send + Sync {
    fn name(&self) -> &str;

    /// Bits of persistent state the program needs. Checked against the budget at construction.
    fn state_bits(&self) -> usize {
        0
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, inner: &mut dyn InnerOracle) -> MachineStep;
}

/// A malicious PUF: adversarial program, bounded state, optional embedded honest PUF.
#[derive(Clone)]
pub struct MaliciousPufMachine {
    program: Arc<dyn PufProgram>,
    state: BitString,
    k_state: Option<usize>,
    inner: Option<PufInstance>,
}

impl fmt::Debug for MaliciousPufMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaliciousPufMachine")
            .field("program", &self.program.name())
            .field("state_len", &self.state.len())
            .field("k_state", &self.k_state)
            .finish_non_exhaustive()
    }
}

struct HonestOracle<'a, R: Rng + ?Sized> {
    puf: Option<&'a PufInstance>,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> InnerOracle for HonestOracle<'_, R> {
    fn query(&mut self, s: &BitString) -> Option<BitString> {
        self.puf.and_then(|p| p.eval(s, self.rng).ok())
    }
}

impl MaliciousPufMachine {
    /// Builds a machine; `k_state = None` means unbounded state.
    ///
    /// Fails with `STATE_BUDGET` when the program declares more state than allowed.
    pub fn new(program: Arc<dyn PufProgram>, k_state: Option<usize>, inner: Option<PufInstance>) -> Result<Self, PufError> {
        if let Some(k) = k_state {
            if program.state_bits() > k {
                return Err(PufError::StateBudget { needed: program.state_bits(), allowed: k });
            }
        }
        Ok(Self { program, state: BitString::zeros(0), k_state, inner })
    }

    pub fn program_name(&self) -> &str {
        self.program.name()
    }

    pub fn state(&self) -> &BitString {
        &self.state
    }

    pub fn k_state(&self) -> Option<usize> {
        self.k_state
    }

    /// Runs one step. Returns `(response, outgoing)`; the state update is
    /// rejected with `STATE_BUDGET` when it would exceed `k_state`.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        input: MachineInput<'_>,
        rng: &mut R,
    ) -> Result<(Option<BitString>, Option<BitString>), PufError> {
        let mut oracle = HonestOracle { puf: self.inner.as_ref(), rng };
        let out = self.program.run(input, &self.state, &mut oracle);
        if let Some(k) = self.k_state {
            if out.state.len() > k {
                return Err(PufError::StateBudget { needed: out.state.len(), allowed: k });
            }
        }
        self.state = out.state;
        Ok((out.response, out.outgoing))
    }
}

/// Free-function form of [`MaliciousPufMachine::step`].
pub fn step_malicious<R: Rng + ?Sized>(
    machine: &mut MaliciousPufMachine,
    input: MachineInput<'_>,
    rng: &mut R,
) -> Result<(Option<BitString>, Option<BitString>), PufError> {
    machine.step(input, rng)
}
