//! Deviating receivers for the single-string and collective commitments.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::pufmodel::programs::{Aborting, QueryLogger};
use crate::protocols::{CollReceiver, ExtParams, HonestCollReceiver, ProtocolError, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReceiverKind {
    Honest,
    /// `PUF_E` records the first query and replays it on trigger challenges.
    StatefulPufE,
    /// `PUF_E` aborts on every query.
    AbortingPufE,
    /// Sends the all-ones mask.
    AllOnesR,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 4] =
        [ReceiverKind::Honest, ReceiverKind::StatefulPufE, ReceiverKind::AbortingPufE, ReceiverKind::AllOnesR];

    pub fn id(self) -> &'static str {
        match self {
            ReceiverKind::Honest => "honest-receiver",
            ReceiverKind::StatefulPufE => "stateful-puf-e",
            ReceiverKind::AbortingPufE => "aborting-puf-e",
            ReceiverKind::AllOnesR => "all-ones-r",
        }
    }
}

pub struct ZooReceiver {
    kind: ReceiverKind,
    honest: HonestCollReceiver,
    party: Party,
    logger: Option<QueryLogger>,
    /// Query recovered from a stateful `PUF_E` after its return.
    pub recovered_query: Option<BitString>,
}

impl ZooReceiver {
    pub fn new(kind: ReceiverKind, party: Party, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Self { kind, honest: HonestCollReceiver::new(party, rng.random()), party, logger: None, recovered_query: None }
    }

    pub fn kind(&self) -> ReceiverKind {
        self.kind
    }
}

impl CollReceiver for ZooReceiver {
    fn party(&self) -> Party {
        self.party
    }

    fn create_puf_e(&mut self, w: &mut World, params: &ExtParams) -> Result<Sid, ProtocolError> {
        match self.kind {
            ReceiverKind::StatefulPufE => {
                let logger = QueryLogger { challenge_len: params.ext.puf.n, rg: params.ext.puf.rg };
                let sid = w.create_malicious(self.party, Arc::new(logger.clone()), &params.ext.puf)?;
                self.logger = Some(logger);
                Ok(sid)
            }
            ReceiverKind::AbortingPufE => w.create_malicious(self.party, Arc::new(Aborting), &params.ext.puf),
            _ => self.honest.create_puf_e(w, params),
        }
    }

    fn verify_returned(&mut self, w: &mut World, params: &ExtParams, returned: Sid) -> bool {
        match self.kind {
            ReceiverKind::StatefulPufE => {
                let Some(logger) = self.logger.clone() else { return false };
                let mut bits = Vec::new();
                for chunk in 0..logger.chunks() {
                    match w.eval_ok(self.party, returned, &logger.trigger(chunk as u16)) {
                        Some(r) => bits.extend(r.iter()),
                        None => return true,
                    }
                }
                bits.truncate(logger.challenge_len);
                self.recovered_query = Some(BitString::from_bits(&bits));
                true
            }
            ReceiverKind::AbortingPufE => true,
            _ => self.honest.verify_returned(w, params, returned),
        }
    }

    fn choose_r(&mut self, count: usize, len: usize) -> Vec<BitString> {
        match self.kind {
            ReceiverKind::AllOnesR => vec![BitString::ones(len); count],
            _ => self.honest.choose_r(count, len),
        }
    }
}
