use puflab::bitlab::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn bits(s: &str) -> BitString {
    BitString::parse(s).unwrap()
}

#[test]
fn hamming_examples() {
    assert_eq!(hamming_distance(&bits("1010"), &bits("1000")).unwrap(), 1);
    let x = bits("110100111");
    assert_eq!(hamming_distance(&x, &x).unwrap(), 0);
    let e = hamming_distance(&bits("10"), &bits("101")).unwrap_err();
    assert!(e.to_string().starts_with("LEN_MISMATCH"));
}

fn per_bit_distance(a: u64, b: u64, len: usize) -> usize {
    (0..len).filter(|&i| (a >> i) & 1 != (b >> i) & 1).count()
}

proptest! {
    #[test]
    fn hamming_matches_per_bit_loop(a: u64, b: u64) {
        let (x, y) = (BitString::from_u64(a, 64), BitString::from_u64(b, 64));
        prop_assert_eq!(hamming_distance(&x, &y).unwrap(), per_bit_distance(a, b, 64));
    }

    #[test]
    fn hamming_is_a_metric(a in prop::collection::vec(any::<bool>(), 1..200), seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = BitString::from_bits(&a);
        let y = BitString::random(a.len(), &mut rng);
        let z = BitString::random(a.len(), &mut rng);
        let d = |p: &BitString, q: &BitString| hamming_distance(p, q).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
        prop_assert_eq!(d(&x, &y), x.xor(&y).unwrap().count_ones());
    }

    #[test]
    fn hex_and_text_round_trip(a in prop::collection::vec(any::<bool>(), 0..300)) {
        let x = BitString::from_bits(&a);
        prop_assert_eq!(BitString::from_hex(&x.to_hex()).unwrap(), x.clone());
        prop_assert_eq!(x.iter().collect::<Vec<_>>(), a);
    }

    #[test]
    fn concat_then_slice_recovers_parts(
        a in prop::collection::vec(any::<bool>(), 0..150),
        b in prop::collection::vec(any::<bool>(), 0..150),
    ) {
        let (x, y) = (BitString::from_bits(&a), BitString::from_bits(&b));
        let xy = x.concat(&y);
        prop_assert_eq!(xy.len(), a.len() + b.len());
        prop_assert_eq!(xy.slice(0, a.len()), x);
        prop_assert_eq!(xy.slice(a.len(), b.len()), y);
    }

    #[test]
    fn xor_is_an_involution(a in prop::collection::vec(any::<bool>(), 1..300), seed: u64) {
        let x = BitString::from_bits(&a);
        let k = BitString::random(a.len(), &mut ChaCha20Rng::seed_from_u64(seed));
        prop_assert_eq!(x.xor(&k).unwrap().xor(&k).unwrap(), x.clone());
        prop_assert_eq!(x.not().not(), x);
    }
}

#[test]
fn neighborhood_examples() {
    assert_eq!(neighborhood_size(8, 1).unwrap(), 1u32.into());
    for n in 0..12 {
        assert_eq!(neighborhood_size(n, n + 1).unwrap(), (1u64 << n).into());
    }
    assert!(neighborhood_size(4, 6).is_err());
}

#[test]
fn neighborhood_matches_cube_enumeration() {
    for n in 1..=10usize {
        for d in 0..=n + 1 {
            let count = (0u64..1 << n).filter(|v| (v.count_ones() as usize) < d).count() as u64;
            assert_eq!(neighborhood_size(n, d).unwrap(), count.into(), "n={n} d={d}");
            let f = neighborhood_fraction(n, d).unwrap();
            assert!((f - count as f64 / (1u64 << n) as f64).abs() < 1e-15);
        }
    }
    assert_eq!(neighborhood_size(4, 3).unwrap(), 11u32.into());
}

#[test]
fn neighborhood_fraction_at_large_n() {
    assert!((neighborhood_fraction(200, 201).unwrap() - 1.0).abs() < 1e-12);
    assert!((neighborhood_fraction(200, 1).unwrap() - 2f64.powi(-200)).abs() < 1e-70);
}

fn joint(probs: Vec<Vec<f64>>) -> JointDistribution {
    let xs = (0..probs.len() as u64).collect();
    let ys = (0..probs[0].len() as u64).collect();
    JointDistribution::new(xs, ys, probs).unwrap()
}

#[test]
fn avg_min_entropy_examples() {
    let indep = joint(vec![vec![0.25, 0.25], vec![0.25, 0.25]]);
    assert!((avg_min_entropy(&indep) - 1.0).abs() < 1e-12);
    let equal = joint(vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
    assert!(avg_min_entropy(&equal).abs() < 1e-12);
}

/// `-log2 E_y[max_x Pr[X = x | Y = y]]`, evaluated through the conditionals.
fn avg_min_entropy_oracle(p: &[Vec<f64>]) -> f64 {
    let mut expectation = 0.0;
    for j in 0..p[0].len() {
        let py: f64 = p.iter().map(|row| row[j]).sum();
        if py == 0.0 {
            continue;
        }
        let mut best = 0.0f64;
        for row in p {
            best = best.max(row[j] / py);
        }
        expectation += py * best;
    }
    -expectation.log2()
}

#[test]
fn avg_min_entropy_matches_oracle_on_random_tables() {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    for _ in 0..1000 {
        let mut w: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        if rng.random_bool(0.3) {
            w[rng.random_range(0..4)][rng.random_range(0..4)] = 0.0;
        }
        let total: f64 = w.iter().flatten().sum();
        let p: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|v| v / total).collect()).collect();
        let d = JointDistribution::from_weights((0..4).collect(), (0..4).collect(), w).unwrap();
        assert!((avg_min_entropy(&d) - avg_min_entropy_oracle(&p)).abs() < 1e-9);
    }
}

#[test]
fn distribution_validation() {
    assert!(JointDistribution::new(vec![0], vec![0], vec![vec![0.9]]).is_err());
    assert!(JointDistribution::new(vec![0, 1], vec![0], vec![vec![1.0]]).is_err());
    assert!(JointDistribution::new(vec![0], vec![0], vec![vec![f64::NAN]]).is_err());
}

#[test]
fn min_and_max_entropy() {
    assert_eq!(min_entropy(&[0.25; 4]), 2.0);
    assert_eq!(min_entropy(&[1.0, 0.0]), 0.0);
    assert_eq!(max_entropy(&[0.5, 0.0, 0.5]), 1.0);
}

#[test]
fn statistical_distance_examples() {
    let p = [0.2, 0.3, 0.5];
    assert_eq!(statistical_distance(&p, &p).unwrap(), 0.0);
    assert_eq!(statistical_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
    assert!(statistical_distance(&[1.0], &[0.5, 0.5]).is_err());
}

#[test]
fn statistical_distance_of_two_runs_of_one_process() {
    // 16-bin histogram of a skewed process, 10^5 samples per run. The sum of
    // per-bin binomial deviations at 3 sigma bounds the expected distance well below 0.02.
    let sample = |seed: u64| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut h = [0f64; 16];
        for _ in 0..100_000 {
            let v = rng.random::<u8>() & rng.random::<u8>() & 0x0f;
            h[v as usize] += 1.0;
        }
        h.map(|c| c / 100_000.0)
    };
    let sd = statistical_distance(&sample(1), &sample(2)).unwrap();
    assert!(sd <= 0.02, "{sd}");
}

#[test]
fn lemma_equality_is_tight_on_deterministic_equality() {
    // X = Y uniform on {0,1}^2: Pr[X = Y] = 1 = 2^-H(X|Y).
    let d = joint((0..4).map(|i| (0..4).map(|j| if i == j { 0.25 } else { 0.0 }).collect()).collect());
    let pr_eq: f64 = (0..4).map(|i| d.prob(i, i)).sum();
    assert_eq!(pr_eq, 1.0);
    assert_eq!(2f64.powf(-avg_min_entropy(&d)), 1.0);
}

#[test]
fn lemma_chain_rule_with_constant_z_has_no_slack() {
    // Z constant: H(X | Y, Z) = H(X | Y) and H_0(Z) = 0.
    let d = joint(vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
    let with_z = d.map_y(|y| y * 2);
    assert_eq!(avg_min_entropy(&with_z), avg_min_entropy(&d));
    assert_eq!(max_entropy(&[1.0]), 0.0);
}

#[test]
fn lemma_suite_has_no_violations() {
    let report = check_entropy_lemmas(10_000, 8, 3).unwrap();
    assert_eq!(report.total_violations(), 0, "{:?}", report.tallies);
    assert_eq!(report.tallies.len(), Lemma::ALL.len());
    for t in report.tallies.values() {
        assert!(t.checks >= 10_000);
    }
}

#[test]
fn neighborhood_lemma_alone() {
    let t = check_neighborhood_lemma(6, 2000, 9).unwrap();
    assert_eq!((t.checks, t.violations), (2000, 0));
    assert!(check_entropy_lemmas(1, 1, 0).is_err());
}
