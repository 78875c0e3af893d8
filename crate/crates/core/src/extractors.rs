//! Straight-line extractors with interface access.
//!
//! An extractor plays the honest receiver and reads the functionality's tap
//! of honest-PUF evaluations; it never sends anything, so the sender's view
//! is the one it has against an honest receiver.

use std::collections::BTreeSet;

use crate::bitlab::{BitError, BitString};
use crate::ecc::RepetitionCode;
use crate::functionality::{Party, PufFunctionality, Sid};
use crate::protocols::{CollSession, EventRange, ExtParams, OriginalParams, OriginalSession};

/// Candidate committed string from a guess `st` of the extracted key.
///
/// Block `j` gives 0 when `c|I_j = st|I_j` only, 1 when `c|I_j = (st XOR r)|I_j`
/// only, and the whole extraction fails otherwise (in particular when `r|I_j = 0`).
pub fn extract_from_query(
    st: &BitString,
    c: &BitString,
    r: &BitString,
    k: usize,
) -> Result<Option<BitString>, BitError> {
    if st.len() != c.len() {
        return Err(BitError::LenMismatch { left: st.len(), right: c.len() });
    }
    if st.len() != r.len() {
        return Err(BitError::LenMismatch { left: st.len(), right: r.len() });
    }
    if k == 0 || !st.len().is_multiple_of(k) {
        return Err(BitError::LenMismatch { left: st.len(), right: k });
    }
    // Block j reads 0 iff c XOR st vanishes on I_j, and 1 iff c XOR st XOR r does.
    let d = c.xor(st)?;
    let e = d.xor(r)?;
    let (mut zero, mut one) = (vec![true; k], vec![true; k]);
    for p in d.positions() {
        zero[p % k] = false;
    }
    for p in e.positions() {
        one[p % k] = false;
    }
    let mut x = Vec::with_capacity(k);
    for j in 0..k {
        match (zero[j], one[j]) {
            (true, false) => x.push(false),
            (false, true) => x.push(true),
            _ => return Ok(None),
        }
    }
    Ok(Some(BitString::from_bits(&x)))
}

/// Challenges sent to honest PUF `sid` by anyone but `owner` within `events`.
pub fn tapped_queries(func: &PufFunctionality, sid: Sid, owner: Party, events: &EventRange) -> Vec<BitString> {
    // Tap steps are 1-based positions in the event log.
    func.tap()
        .iter()
        .filter(|t| t.sid == sid && t.querier != owner)
        .filter(|t| (events.start as u64) < t.step && t.step <= events.end as u64)
        .map(|t| t.challenge.clone())
        .collect()
}

/// The unique distinct candidate, or `None`.
fn unique(candidates: BTreeSet<BitString>) -> Option<BitString> {
    let mut it = candidates.into_iter();
    match (it.next(), it.next()) {
        (Some(x), None) => Some(x),
        _ => None,
    }
}

fn decoded(queries: &[BitString], code: &RepetitionCode) -> Vec<BitString> {
    queries.iter().filter_map(|q| code.dec(q).ok()).collect()
}

fn candidates(keys: &[BitString], c: &BitString, r: &BitString, k: usize) -> BTreeSet<BitString> {
    keys.iter().filter_map(|st| extract_from_query(st, c, r, k).ok().flatten()).collect()
}

/// Collective extractor: one value (or `None` for bottom) per committed string.
pub fn run_extractor_collective(func: &PufFunctionality, params: &ExtParams, session: &CollSession) -> Vec<Option<BitString>> {
    let queries = tapped_queries(func, session.puf_e_lent, session.receiver, &session.commit_events);
    let keys = decoded(&queries, &params.code);
    (0..session.count)
        .map(|i| unique(candidates(&keys, &session.c[i], &session.r[i], params.k)))
        .collect()
}

/// Extractor for the single-string commitment.
pub fn run_extractor_modified(func: &PufFunctionality, params: &ExtParams, session: &CollSession) -> Option<BitString> {
    run_extractor_collective(func, params, session).into_iter().next().flatten()
}

/// Extractor for the original two-PUF commitment: candidates come from `c_1, r_1`.
pub fn run_extractor_original(
    func: &PufFunctionality,
    params: &OriginalParams,
    session: &OriginalSession,
) -> Option<BitString> {
    let queries = tapped_queries(func, session.puf_e, session.receiver, &session.commit_events);
    unique(candidates(&decoded(&queries, &params.code), &session.c1, &session.r1, params.k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn first_and_second_branch() {
        // k = 2, n = 2: I_0 = {0, 2}, I_1 = {1, 3}
        let st = bits("1010");
        let r = bits("1111");
        assert_eq!(extract_from_query(&st, &st, &r, 2).unwrap(), Some(bits("00")));
        assert_eq!(extract_from_query(&st, &st.xor(&r).unwrap(), &r, 2).unwrap(), Some(bits("11")));
    }

    #[test]
    fn zero_mask_block_is_bottom() {
        let st = bits("1010");
        let r = bits("0101");
        assert_eq!(extract_from_query(&st, &st, &r, 2).unwrap(), None);
    }

    #[test]
    fn length_mismatch() {
        let e = extract_from_query(&bits("10"), &bits("101"), &bits("10"), 1).unwrap_err();
        assert!(e.to_string().starts_with("LEN_MISMATCH"));
    }

    #[test]
    fn duplicate_values_count_once() {
        let mut s = BTreeSet::new();
        s.insert(bits("1"));
        s.insert(bits("1"));
        assert_eq!(unique(s), Some(bits("1")));
        let s: BTreeSet<_> = [bits("0"), bits("1")].into();
        assert_eq!(unique(s), None);
    }
}
