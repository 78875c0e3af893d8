use puflab::adversaries::{honest_extraction, original_trial, zoo_trial, CommitterKind, ReceiverKind};
use puflab::bitlab::BitString;
use puflab::extractors::*;
use puflab::functionality::{CommBudget, FuncConfig, RECEIVER, SENDER};
use puflab::protocols::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// `st XOR (x^l AND r)`, built position by position with `I_j = {i : i mod k = j}`.
fn commit_oracle(st: &BitString, x: &BitString, r: &BitString) -> BitString {
    let k = x.len();
    let bits: Vec<bool> = (0..st.len()).map(|i| st.get(i) ^ (x.get(i % k) & r.get(i))).collect();
    BitString::from_bits(&bits)
}

/// Random mask with at least one set bit in every block.
fn full_mask(k: usize, l: usize, rng: &mut ChaCha20Rng) -> BitString {
    let mut r = BitString::random(k * l, rng);
    for j in 0..k {
        r.set(j, true);
    }
    r
}

#[test]
fn branches_at_every_block() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (k, l) = (4, 6);
    let st = BitString::random(k * l, &mut rng);
    let r = full_mask(k, l, &mut rng);
    assert_eq!(extract_from_query(&st, &st, &r, k).unwrap(), Some(BitString::zeros(k)));
    assert_eq!(extract_from_query(&st, &st.xor(&r).unwrap(), &r, k).unwrap(), Some(BitString::ones(k)));
}

#[test]
fn zero_mask_on_the_first_block_is_bottom() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (k, l) = (3, 5);
    let st = BitString::random(k * l, &mut rng);
    let mut r = full_mask(k, l, &mut rng);
    for t in 0..l {
        r.set(t * k, false);
    }
    for x in 0..1u64 << k {
        let c = commit_oracle(&st, &BitString::from_u64(x, k), &r);
        assert_eq!(extract_from_query(&st, &c, &r, k).unwrap(), None);
    }
}

proptest! {
    #[test]
    fn extracts_the_committed_string(k in 1usize..6, l in 1usize..10, x: u64, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = BitString::from_u64(x & ((1 << k) - 1), k);
        let st = BitString::random(k * l, &mut rng);
        let r = full_mask(k, l, &mut rng);
        let c = commit_oracle(&st, &x, &r);
        prop_assert_eq!(c.clone(), st.xor(&masking::mask(&x, &r).unwrap()).unwrap());
        prop_assert_eq!(extract_from_query(&st, &c, &r, k).unwrap(), Some(x));
    }

    #[test]
    fn wrong_key_rarely_extracts(k in 1usize..5, seed: u64) {
        // A key unrelated to c matches one branch per block with probability 2^-(l-1) each.
        let l = 24;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let st = BitString::random(k * l, &mut rng);
        let other = BitString::random(k * l, &mut rng);
        let r = full_mask(k, l, &mut rng);
        let c = commit_oracle(&st, &BitString::zeros(k), &r);
        prop_assert_eq!(extract_from_query(&other, &c, &r, k).unwrap(), None);
    }
}

#[test]
fn honest_senders_are_extracted() {
    let cfg = DeskConfig::new(32, 4);
    for seed in 0..1000 {
        assert!(honest_extraction(&cfg, 1, seed).unwrap(), "seed {seed}");
    }
    for seed in 0..50 {
        assert!(honest_extraction(&cfg, 4, seed).unwrap(), "seed {seed}");
    }
}

#[test]
fn non_querying_sender_is_bottom_and_never_accepted() {
    let cfg = DeskConfig::new(32, 4);
    for seed in 0..1000 {
        let t = zoo_trial(ProtocolId::Extpuf, CommitterKind::NonQuerying, ReceiverKind::Honest, &cfg, 1, EXTRACTABLE_BUDGET, seed)
            .unwrap();
        assert_eq!(t.extracted, vec![None]);
        assert_eq!(t.accepted, vec![None]);
    }
}

#[test]
fn adversarial_openings_never_differ_from_extraction() {
    let cfg = DeskConfig::new(32, 4);
    for kind in [CommitterKind::RandomDecommit, CommitterKind::Equivocator, CommitterKind::ExtraQuery] {
        for seed in 0..200 {
            let t = zoo_trial(ProtocolId::Collextpuf, kind, ReceiverKind::Honest, &cfg, 3, EXTRACTABLE_BUDGET, seed).unwrap();
            assert_eq!(t.violations, 0, "{} seed {seed}", kind.id());
        }
    }
}

fn honest_session(seed: u64, run_extractor: bool) -> (String, String, Option<BitString>, BitString) {
    let params = ExtParams::desk(&DeskConfig::new(16, 2)).unwrap();
    let x = BitString::from_u64(seed % 4, 2);
    let mut w = World::new(FuncConfig::communicating(EXTRACTABLE_BUDGET), seed);
    let mut s = HonestCollCommitter::new(SENDER, vec![x.clone()], seed + 1);
    let mut r = HonestCollReceiver::new(RECEIVER, seed + 2);
    let session = coll_commit(&mut w, &params, &mut s, &mut r).unwrap();
    let extracted = run_extractor.then(|| run_extractor_modified(w.func(), &params, &session)).flatten();
    assert!(coll_open(&mut w, &params, &session, &mut s, 0).is_accept());
    (w.transcript_jsonl(), w.func().log_jsonl(), extracted, x)
}

#[test]
fn extraction_leaves_the_view_unchanged() {
    for seed in 0..20 {
        let (t1, l1, _, _) = honest_session(seed, false);
        let (t2, l2, x_star, x) = honest_session(seed, true);
        assert_eq!(t1, t2);
        assert_eq!(l1, l2);
        assert_eq!(x_star, Some(x));
    }
}

#[test]
fn collective_with_no_strings_extracts_nothing() {
    let params = ExtParams::desk(&DeskConfig::new(16, 2)).unwrap();
    let mut w = World::new(FuncConfig::communicating(CommBudget::STATELESS), 1);
    let mut s = HonestCollCommitter::new(SENDER, vec![BitString::zeros(2)], 2);
    let mut r = HonestCollReceiver::new(RECEIVER, 3);
    let mut session = coll_commit(&mut w, &params, &mut s, &mut r).unwrap();
    session.count = 0;
    assert!(run_extractor_collective(w.func(), &params, &session).is_empty());
}

#[test]
fn original_extractor_on_honest_and_attacking_senders() {
    let cfg = DeskConfig::new(16, 1);
    for seed in 0..50 {
        let honest = original_trial(&cfg, false, seed).unwrap();
        assert_eq!(honest.extracted.as_ref(), Some(&honest.committed));
        assert_eq!(honest.accepted.as_ref(), Some(&honest.committed));
        let attack = original_trial(&cfg, true, seed).unwrap();
        assert_eq!(attack.extracted, None);
        assert_eq!(attack.accepted, Some(BitString::zeros(1)));
    }
}
