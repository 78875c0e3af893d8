use rand::Rng;

use super::{Bundle, ProtocolError, World};
use crate::bitlab::BitString;
use crate::functionality::{Party, Sid};
use crate::fuzzyext::HelperData;

/// Challenge-response pair the creator of a PUF records before lending it out,
/// so that a substituted PUF can be recognised on return.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestQuery {
    pub challenge: BitString,
    pub st: BitString,
    pub p: HelperData,
}

impl TestQuery {
    pub fn make<R: Rng + ?Sized>(
        w: &mut World,
        owner: Party,
        sid: Sid,
        bundle: &Bundle,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        let challenge = BitString::random(bundle.puf.n, rng);
        let sigma = w.eval_ok(owner, sid, &challenge).ok_or_else(|| ProtocolError::Abort("test-query".into()))?;
        let (st, p) = bundle.fe.gen(&sigma, rng).map_err(|e| ProtocolError::Abort(format!("test-query: {e}")))?;
        Ok(Self { challenge, st, p })
    }

    /// True when the PUF now at `sid` reproduces the recorded key.
    pub fn verify(&self, w: &mut World, owner: Party, sid: Sid, bundle: &Bundle) -> bool {
        w.eval_ok(owner, sid, &self.challenge)
            .and_then(|sigma| bundle.fe.rep(&sigma, &self.p).ok())
            .is_some_and(|st| st == self.st)
    }
}
