//! Ready-made malicious PUF programs used by the adversary zoo and tests.

use std::sync::Arc;

use super::machine::{InnerOracle, MachineInput, MachineStep, PufProgram};
use crate::bitlab::BitString;

/// Answers queries with the embedded honest PUF, keeps no state.
#[derive(Debug, Clone, Default)]
pub struct PassThrough;

impl PufProgram for PassThrough {
    fn name(&self) -> &str {
        "pass-through"
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, inner: &mut dyn InnerOracle) -> MachineStep {
        match input {
            MachineInput::Query(s) => MachineStep { response: inner.query(s), outgoing: None, state: state.clone() },
            MachineInput::Msg(_) => MachineStep { state: state.clone(), ..Default::default() },
        }
    }
}

/// Answers every query with `0^rg`.
#[derive(Debug, Clone)]
pub struct Constant {
    pub rg: usize,
}

impl PufProgram for Constant {
    fn name(&self) -> &str {
        "constant"
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, _inner: &mut dyn InnerOracle) -> MachineStep {
        let response = matches!(input, MachineInput::Query(_)).then(|| BitString::zeros(self.rg));
        MachineStep { response, outgoing: None, state: state.clone() }
    }
}

/// Aborts on every query.
#[derive(Debug, Clone, Default)]
pub struct Aborting;

impl PufProgram for Aborting {
    fn name(&self) -> &str {
        "aborting"
    }

    fn run(&self, _input: MachineInput<'_>, state: &BitString, _inner: &mut dyn InnerOracle) -> MachineStep {
        MachineStep { state: state.clone(), ..Default::default() }
    }
}

/// Honest answers, but every query challenge is also sent to the creator.
#[derive(Debug, Clone, Default)]
pub struct Leaker;

impl PufProgram for Leaker {
    fn name(&self) -> &str {
        "leaker"
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, inner: &mut dyn InnerOracle) -> MachineStep {
        match input {
            MachineInput::Query(s) => {
                MachineStep { response: inner.query(s), outgoing: Some(s.clone()), state: state.clone() }
            }
            MachineInput::Msg(m) => MachineStep { response: None, outgoing: Some(m.clone()), state: state.clone() },
        }
    }
}

/// Stateless echo: replies to creator messages with the same payload.
#[derive(Debug, Clone, Default)]
pub struct EchoMsg;

impl PufProgram for EchoMsg {
    fn name(&self) -> &str {
        "echo-msg"
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, inner: &mut dyn InnerOracle) -> MachineStep {
        match input {
            MachineInput::Query(s) => MachineStep { response: inner.query(s), outgoing: None, state: state.clone() },
            MachineInput::Msg(m) => MachineStep { response: None, outgoing: Some(m.clone()), state: state.clone() },
        }
    }
}

/// Records the first ordinary query it sees and hands it back later.
///
/// A challenge whose first half is all ones is a trigger; its last 16 bits
/// select which `rg`-bit chunk of the recorded query to return.
#[derive(Debug, Clone)]
pub struct QueryLogger {
    pub challenge_len: usize,
    pub rg: usize,
}

impl QueryLogger {
    pub fn trigger(&self, chunk: u16) -> BitString {
        let mut t = BitString::ones(self.challenge_len);
        let tail = 16.min(self.challenge_len / 2);
        for i in 0..tail {
            t.set(self.challenge_len - tail + i, (chunk >> i) & 1 == 1);
        }
        t
    }

    /// Number of trigger queries needed to read out a full recorded query.
    pub fn chunks(&self) -> usize {
        self.challenge_len.div_ceil(self.rg)
    }

    fn is_trigger(&self, s: &BitString) -> Option<usize> {
        if s.len() != self.challenge_len || self.challenge_len < 2 {
            return None;
        }
        let half = self.challenge_len / 2;
        if s.slice(0, half).count_ones() != half {
            return None;
        }
        let tail = 16.min(half);
        Some((0..tail).filter(|&i| s.get(self.challenge_len - tail + i)).map(|i| 1usize << i).sum())
    }
}

impl PufProgram for QueryLogger {
    fn name(&self) -> &str {
        "query-logger"
    }

    fn state_bits(&self) -> usize {
        self.challenge_len
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, inner: &mut dyn InnerOracle) -> MachineStep {
        let MachineInput::Query(s) = input else {
            return MachineStep { state: state.clone(), ..Default::default() };
        };
        if let Some(chunk) = self.is_trigger(s) {
            let mut out = BitString::zeros(self.rg);
            for i in 0..self.rg {
                let at = chunk * self.rg + i;
                if at < state.len() && state.get(at) {
                    out.set(i, true);
                }
            }
            return MachineStep { response: Some(out), outgoing: None, state: state.clone() };
        }
        let state = if state.is_empty() { s.clone() } else { state.clone() };
        MachineStep { response: inner.query(s), outgoing: None, state }
    }
}

type StepFn = dyn Fn(MachineInput<'_>, &BitString, &mut dyn InnerOracle) -> MachineStep + Send + Sync;

/// Program defined by a closure.
pub struct ClosureProgram {
    name: String,
    state_bits: usize,
    f: Box<StepFn>,
}

impl ClosureProgram {
    pub fn new(
        name: impl Into<String>,
        state_bits: usize,
        f: impl Fn(MachineInput<'_>, &BitString, &mut dyn InnerOracle) -> MachineStep + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), state_bits, f: Box::new(f) }
    }

    pub fn shared(self) -> Arc<dyn PufProgram> {
        Arc::new(self)
    }
}

impl PufProgram for ClosureProgram {
    fn name(&self) -> &str {
        &self.name
    }

    fn state_bits(&self) -> usize {
        self.state_bits
    }

    fn run(&self, input: MachineInput<'_>, state: &BitString, inner: &mut dyn InnerOracle) -> MachineStep {
        (self.f)(input, state, inner)
    }
}
