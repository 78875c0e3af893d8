use serde::Serialize;

use super::types::{Party, RECEIVER, SENDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FComMsg {
    Commit(bool),
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FComDelivery {
    /// `(receipt)`: a bit has been committed.
    Receipt { to: Party },
    Opened { to: Party, bit: bool },
}

/// Ideal bit commitment between [`SENDER`] and [`RECEIVER`].
#[derive(Clone, Debug, Default)]
pub struct FCom {
    committed: Option<bool>,
    halted: bool,
}

impl FCom {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn committed(&self) -> Option<bool> {
        self.committed
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    /// Only the committer's messages have any effect; repeated commits and
    /// anything after the opening are ignored.
    pub fn handle(&mut self, from: Party, msg: FComMsg) -> Vec<FComDelivery> {
        if from != SENDER || self.halted {
            return Vec::new();
        }
        match (msg, self.committed) {
            (FComMsg::Commit(b), None) => {
                self.committed = Some(b);
                vec![FComDelivery::Receipt { to: RECEIVER }, FComDelivery::Receipt { to: Party::Adversary }]
            }
            (FComMsg::Open, Some(bit)) => {
                self.halted = true;
                vec![FComDelivery::Opened { to: RECEIVER, bit }, FComDelivery::Opened { to: Party::Adversary, bit }]
            }
            _ => Vec::new(),
        }
    }
}
