use puflab::bitlab::{hamming_distance, BitString};
use puflab::ecc::{EccError, EccParams, RepetitionCode};
use puflab::harness::props::{ecc_sweep, small_codes};
use proptest::prelude::*;

fn bits(s: &str) -> BitString {
    BitString::parse(s).unwrap()
}

/// Majority of each `r`-bit block, computed bit by bit.
fn majority_oracle(w: &[bool], r: usize) -> Vec<bool> {
    w.chunks(r).map(|block| block.iter().filter(|&&b| b).count() > r / 2).collect()
}

#[test]
fn bit_major_layout() {
    let code = RepetitionCode::new(2, 3).unwrap();
    assert_eq!(code.enc(&bits("10")).unwrap(), bits("111000"));
    assert_eq!(code.params(), EccParams { msg_len: 2, code_len: 6, distance: 3 });
}

#[test]
fn zero_message_encodes_to_zero() {
    let code = RepetitionCode::new(7, 5).unwrap();
    assert_eq!(code.enc(&BitString::zeros(7)).unwrap(), BitString::zeros(35));
}

#[test]
fn codewords_are_pairwise_far_apart() {
    let code = RepetitionCode::new(6, 3).unwrap();
    let words: Vec<_> = (0..64).map(|m| code.enc(&BitString::from_u64(m, 6)).unwrap()).collect();
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            assert!(hamming_distance(a, b).unwrap() >= 3);
        }
    }
}

#[test]
fn decode_inverts_encode_for_short_messages() {
    for n in 0..=10 {
        let code = RepetitionCode::new(n, 3).unwrap();
        for m in 0..1u64 << n {
            let msg = BitString::from_u64(m, n);
            assert_eq!(code.dec(&code.enc(&msg).unwrap()).unwrap(), msg);
        }
    }
}

#[test]
fn two_flips_in_one_block_of_five_are_corrected() {
    let code = RepetitionCode::new(3, 5).unwrap();
    let m = bits("101");
    let mut w = code.enc(&m).unwrap();
    w.flip(5);
    w.flip(8);
    assert_eq!(code.dec(&w).unwrap(), m);
}

#[test]
fn three_flips_in_one_block_of_five_flip_that_bit() {
    let code = RepetitionCode::new(3, 5).unwrap();
    let m = bits("101");
    let mut w = code.enc(&m).unwrap();
    for i in [5, 6, 9] {
        w.flip(i);
    }
    let expected = BitString::from_bits(&majority_oracle(&w.iter().collect::<Vec<_>>(), 5));
    assert_eq!(expected, bits("111"));
    assert_eq!(code.dec(&w).unwrap(), expected);
}

#[test]
fn even_or_zero_factor_is_rejected() {
    assert_eq!(RepetitionCode::new(4, 2).unwrap_err(), EccError::Factor(2));
    assert_eq!(RepetitionCode::new(4, 0).unwrap_err(), EccError::Factor(0));
    assert_eq!(RepetitionCode::with_min_distance_radius(4, 3).unwrap().factor(), 5);
}

#[test]
fn length_mismatch() {
    let code = RepetitionCode::new(2, 3).unwrap();
    assert!(code.enc(&bits("1")).unwrap_err().to_string().starts_with("LEN_MISMATCH"));
    assert!(code.dec(&bits("1")).unwrap_err().to_string().starts_with("LEN_MISMATCH"));
}

#[test]
fn exhaustive_correctable_patterns_up_to_length_18() {
    let codes = small_codes(18);
    assert!(codes.iter().all(|&(m, r)| m * r <= 18 && r % 2 == 1));
    let mut cases = 0;
    for (m, r) in codes {
        let s = ecc_sweep(m, r);
        assert_eq!(s.failures, 0, "N={m} r={r}");
        cases += s.cases;
    }
    assert!(cases > 700_000);
}

#[test]
fn sweep_counts_match_binomial_sum() {
    // N = 2, r = 3: radius 1, so each of the 4 messages meets 1 + 6 patterns.
    let s = ecc_sweep(2, 3);
    assert_eq!((s.codes, s.cases, s.failures), (1, 4 * 7, 0));
}

proptest! {
    #[test]
    fn decoder_is_blockwise_majority(w in prop::collection::vec(any::<bool>(), 1..12usize).prop_flat_map(|m| {
        let n = m.len();
        (Just(n), prop::sample::select(vec![1usize, 3, 5, 7]), prop::collection::vec(any::<bool>(), n * 7))
    })) {
        let (n, r, raw) = w;
        let word = &raw[..n * r];
        let code = RepetitionCode::new(n, r).unwrap();
        let got = code.dec(&BitString::from_bits(word)).unwrap();
        prop_assert_eq!(got.iter().collect::<Vec<_>>(), majority_oracle(word, r));
    }

    #[test]
    fn correctable_noise_is_removed(m in prop::collection::vec(any::<bool>(), 1..40), t in 0usize..4, seed: u64) {
        use rand::{seq::index, SeedableRng};
        let r = 2 * t + 1;
        let code = RepetitionCode::new(m.len(), r).unwrap();
        let msg = BitString::from_bits(&m);
        let mut w = code.enc(&msg).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        for block in 0..m.len() {
            for i in index::sample(&mut rng, r, t) {
                w.flip(block * r + i);
            }
        }
        prop_assert_eq!(code.dec(&w).unwrap(), msg);
    }
}
