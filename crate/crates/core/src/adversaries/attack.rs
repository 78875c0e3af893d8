//! The committer that breaks extraction in the original two-PUF commitment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::AdversaryError;
use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::protocols::{
    HonestOriginalCommitter, OriginalCommitter, OriginalOpening, OriginalParams, OriginalSetup, ProtocolError,
    ProtocolId, World,
};

/// Behaves like an honest committer to `0^k`, and after receiving `r_1`
/// also queries `PUF_E` on `Enc(st_1 XOR r_1)`, which it can do because it
/// still holds `PUF_E`.
pub struct AttackOriginalExtPuf {
    honest: HonestOriginalCommitter,
    /// Answer to the extra query, if `PUF_E` gave one.
    pub extra_answered: bool,
}

/// Builds the attacker for `target`; only the original commitment leaves
/// `PUF_E` with the committer after `r` is sent.
pub fn attack_original_extpuf(
    target: ProtocolId,
    party: Party,
    k: usize,
    seed: u64,
) -> Result<AttackOriginalExtPuf, AdversaryError> {
    match target {
        ProtocolId::OriginalExtpuf => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok(AttackOriginalExtPuf {
                honest: HonestOriginalCommitter::new(party, BitString::zeros(k), rng.random()),
                extra_answered: false,
            })
        }
        ProtocolId::Extpuf | ProtocolId::Collextpuf => Err(AdversaryError::Unconstructible(format!(
            "{target}: PUF_E goes back to the receiver before r is sent, so Enc(st XOR r) cannot be queried"
        ))),
        other => Err(AdversaryError::Unconstructible(format!("{other}: no extraction PUF"))),
    }
}

impl OriginalCommitter for AttackOriginalExtPuf {
    fn party(&self) -> Party {
        self.honest.party()
    }

    fn setup(&mut self, w: &mut World, params: &OriginalParams, puf_e: Sid) -> Result<OriginalSetup, ProtocolError> {
        self.honest.setup(w, params, puf_e)
    }

    fn respond(
        &mut self,
        w: &mut World,
        params: &OriginalParams,
        r1: &BitString,
        r2: &BitString,
    ) -> Result<(BitString, BitString), ProtocolError> {
        let out = self.honest.respond(w, params, r1, r2)?;
        let (Some(st1), Some(puf_e)) = (self.honest.st1().cloned(), self.honest.puf_e()) else {
            return Err(ProtocolError::Abort("respond-before-setup".into()));
        };
        let q = params.code.enc(&st1.xor(r1)?).map_err(|e| ProtocolError::Abort(e.to_string()))?;
        self.extra_answered = w.eval_ok(self.party(), puf_e, &q).is_some();
        Ok(out)
    }

    fn puf_e_to_return(&self) -> Option<Sid> {
        self.honest.puf_e_to_return()
    }

    fn open(&mut self, w: &mut World, params: &OriginalParams) -> Option<OriginalOpening> {
        self.honest.open(w, params)
    }
}
