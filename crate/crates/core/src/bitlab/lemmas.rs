//! Randomised checker for the min-entropy inequalities used by the security proofs.
//!
//! Every trial draws small joint distributions, evaluates both sides of each
//! inequality exactly, and records the slack `rhs - lhs`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{avg_min_entropy, max_entropy, min_entropy, neighborhood_size, BitError, JointDistribution};

/// Absolute tolerance when comparing the two sides of an inequality.
pub const LEMMA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Lemma {
    /// `H(X|Y) <= H(X|f(Y))`.
    Function,
    /// Independent side information does not change average min-entropy.
    Independent,
    /// Selecting among equally unpredictable variables costs at most `log |A|` bits.
    MinEntropy,
    /// Conditioning on `Z` costs at most `H_0(Z)` bits.
    ChainRule,
    /// `Pr[X = Y] <= 2^-H(X|Y)`.
    Equality,
    /// `Pr[X in A(Y)] <= |A| * 2^-H(X|Y)` for Hamming-ball neighbourhoods.
    Neighborhood,
}

impl Lemma {
    pub const ALL: [Lemma; 6] =
        [Lemma::Function, Lemma::Independent, Lemma::MinEntropy, Lemma::ChainRule, Lemma::Equality, Lemma::Neighborhood];

    pub fn id(self) -> &'static str {
        match self {
            Lemma::Function => "function",
            Lemma::Independent => "independent",
            Lemma::MinEntropy => "minentropy",
            Lemma::ChainRule => "chain-rule",
            Lemma::Equality => "equality",
            Lemma::Neighborhood => "neighborhood",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaTally {
    pub checks: u64,
    pub violations: u64,
    /// Smallest observed `rhs - lhs` (negative only on a violation beyond tolerance or within it).
    pub min_slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub trials: u64,
    pub max_support: usize,
    pub tolerance: f64,
    pub tallies: BTreeMap<Lemma, LemmaTally>,
}

impl LemmaReport {
    pub fn total_violations(&self) -> u64 {
        self.tallies.values().map(|t| t.violations).sum()
    }
}

struct Recorder {
    tallies: BTreeMap<Lemma, LemmaTally>,
}

impl Recorder {
    fn record(&mut self, lemma: Lemma, lhs: f64, rhs: f64) {
        let t = self.tallies.entry(lemma).or_insert_with(|| LemmaTally { min_slack: f64::INFINITY, ..Default::default() });
        let slack = rhs - lhs;
        t.checks += 1;
        t.min_slack = t.min_slack.min(slack);
        if slack < -LEMMA_TOLERANCE {
            t.violations += 1;
        }
    }
}

/// Runs every inequality on `trials` random instances with supports of size at most `max_support`.
pub fn check_entropy_lemmas(trials: u64, max_support: usize, seed: u64) -> Result<LemmaReport, BitError> {
    if max_support < 2 {
        return Err(BitError::Precondition("max_support must be at least 2".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rec = Recorder { tallies: BTreeMap::new() };
    let cube_dim = (usize::BITS - 1 - max_support.leading_zeros()) as usize;
    for _ in 0..trials {
        check_function(&mut rng, max_support, &mut rec)?;
        check_independent(&mut rng, max_support, &mut rec)?;
        check_minentropy(&mut rng, max_support, &mut rec)?;
        check_chain_rule(&mut rng, max_support, &mut rec)?;
        check_equality(&mut rng, max_support, &mut rec)?;
        let n = rng.random_range(1..=cube_dim.max(1));
        check_neighborhood_once(&mut rng, n, &mut rec)?;
    }
    Ok(LemmaReport { trials, max_support, tolerance: LEMMA_TOLERANCE, tallies: rec.tallies })
}

/// Neighbourhood inequality alone on `{0,1}^n`, with the ball radius drawn per trial.
pub fn check_neighborhood_lemma(n: usize, trials: u64, seed: u64) -> Result<LemmaTally, BitError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rec = Recorder { tallies: BTreeMap::new() };
    for _ in 0..trials {
        check_neighborhood_once(&mut rng, n, &mut rec)?;
    }
    Ok(rec.tallies.remove(&Lemma::Neighborhood).unwrap_or_default())
}

/// Random non-negative weights drawn from one of several shapes so that
/// sparse, peaked and near-uniform tables are all exercised.
fn random_weights(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let shape = rng.random_range(0..4u8);
    let mut w: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let u: f64 = rng.random();
                    match shape {
                        0 => u,
                        1 => {
                            if rng.random_bool(0.5) {
                                0.0
                            } else {
                                u
                            }
                        }
                        2 => u.powi(6),
                        _ => 1.0 + 0.01 * u,
                    }
                })
                .collect()
        })
        .collect();
    if shape == 2 || rng.random_bool(0.1) {
        let (i, j) = (rng.random_range(0..rows), rng.random_range(0..cols));
        w[i][j] += rows as f64 * cols as f64;
    }
    if w.iter().flatten().all(|&v| v == 0.0) {
        w[0][0] = 1.0;
    }
    w
}

fn random_joint(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> Result<JointDistribution, BitError> {
    let w = random_weights(rng, rows, cols);
    JointDistribution::from_weights((0..rows as u64).collect(), (0..cols as u64).collect(), w)
}

fn random_marginal(rng: &mut ChaCha20Rng, size: usize) -> Vec<f64> {
    let w = random_weights(rng, 1, size).remove(0);
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn check_function(rng: &mut ChaCha20Rng, max: usize, rec: &mut Recorder) -> Result<(), BitError> {
    let (a, b) = (rng.random_range(1..=max), rng.random_range(1..=max));
    let d = random_joint(rng, a, b)?;
    let image = rng.random_range(1..=b) as u64;
    let table: Vec<u64> = (0..b).map(|_| rng.random_range(0..image)).collect();
    let coarse = d.map_y(|y| table[y as usize]);
    rec.record(Lemma::Function, avg_min_entropy(&d), avg_min_entropy(&coarse));
    Ok(())
}

fn check_independent(rng: &mut ChaCha20Rng, max: usize, rec: &mut Recorder) -> Result<(), BitError> {
    let (a, b, c) = (rng.random_range(1..=max), rng.random_range(1..=max), rng.random_range(1..=max));
    let xy = random_joint(rng, a, b)?;
    let z = random_marginal(rng, c);
    let ys: Vec<u64> = (0..(b * c) as u64).collect();
    let probs: Vec<Vec<f64>> =
        (0..a).map(|i| (0..b * c).map(|yz| xy.prob(i, yz / c) * z[yz % c]).collect()).collect();
    let xyz = JointDistribution::from_weights(xy.xs().to_vec(), ys, probs)?;
    let h_xy = avg_min_entropy(&xy);
    let h_xyz = avg_min_entropy(&xyz);
    // Equality is checked as two one-sided inequalities.
    rec.record(Lemma::Independent, h_xy, h_xyz);
    rec.record(Lemma::Independent, h_xyz, h_xy);

    let px = xy.marginal_x();
    let probs: Vec<Vec<f64>> = px.iter().map(|&p| z.iter().map(|&q| p * q).collect()).collect();
    let xz = JointDistribution::from_weights(xy.xs().to_vec(), (0..c as u64).collect(), probs)?;
    let (h_xz, h_x) = (avg_min_entropy(&xz), min_entropy(&px));
    rec.record(Lemma::Independent, h_xz, h_x);
    rec.record(Lemma::Independent, h_x, h_xz);
    Ok(())
}

/// Family `X_a` (a in A), each jointly distributed with `Y`, plus a selector `A`.
/// `X_a` and `A` are conditionally independent given `Y`.
fn check_minentropy(rng: &mut ChaCha20Rng, max: usize, rec: &mut Recorder) -> Result<(), BitError> {
    let (na, ny, nx) = (rng.random_range(1..=max), rng.random_range(1..=max), rng.random_range(1..=max));
    let py = random_marginal(rng, ny);
    let pa_given_y: Vec<Vec<f64>> = (0..ny).map(|_| random_marginal(rng, na)).collect();
    // With equal_entropy, every X_a is a relabelling of X_0, which makes all H(X_a|Y) equal.
    let equal_entropy = rng.random_bool(0.5);
    let base: Vec<Vec<f64>> = (0..ny).map(|_| random_marginal(rng, nx)).collect();
    let kernels: Vec<Vec<Vec<f64>>> = (0..na)
        .map(|_| {
            if equal_entropy {
                let perm = random_permutation(rng, nx);
                base.iter().map(|row| perm.iter().map(|&p| row[p]).collect()).collect()
            } else {
                (0..ny).map(|_| random_marginal(rng, nx)).collect()
            }
        })
        .collect();

    let mut h_each = Vec::with_capacity(na);
    for k in &kernels {
        let probs: Vec<Vec<f64>> = (0..nx).map(|x| (0..ny).map(|y| py[y] * k[y][x]).collect()).collect();
        let d = JointDistribution::from_weights((0..nx as u64).collect(), (0..ny as u64).collect(), probs)?;
        h_each.push(avg_min_entropy(&d));
    }
    let probs: Vec<Vec<f64>> = (0..nx)
        .map(|x| (0..ny).map(|y| (0..na).map(|a| py[y] * pa_given_y[y][a] * kernels[a][y][x]).sum()).collect())
        .collect();
    let selected = JointDistribution::from_weights((0..nx as u64).collect(), (0..ny as u64).collect(), probs)?;
    let h_sel = avg_min_entropy(&selected);
    let h_min = h_each.iter().cloned().fold(f64::INFINITY, f64::min);
    let h0_a = (na as f64).log2();
    rec.record(Lemma::MinEntropy, h_min - h0_a, h_sel);
    let sum: f64 = h_each.iter().map(|h| 2f64.powf(-h)).sum();
    rec.record(Lemma::MinEntropy, -sum.log2(), h_sel);
    Ok(())
}

fn random_permutation(rng: &mut ChaCha20Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

fn check_chain_rule(rng: &mut ChaCha20Rng, max: usize, rec: &mut Recorder) -> Result<(), BitError> {
    let (a, b, c) = (rng.random_range(1..=max), rng.random_range(1..=max), rng.random_range(1..=max));
    // The pair (Y, Z) is encoded as y * c + z.
    let xyz = random_joint(rng, a, b * c)?;
    let xy = xyz.map_y(|yz| yz / c as u64);
    let xz = xyz.map_y(|yz| yz % c as u64);
    let pz = xz.marginal_y();
    let h0_z = max_entropy(&pz);
    rec.record(Lemma::ChainRule, avg_min_entropy(&xy) - h0_z, avg_min_entropy(&xyz));
    rec.record(Lemma::ChainRule, min_entropy(&xyz.marginal_x()) - h0_z, avg_min_entropy(&xz));
    Ok(())
}

fn check_equality(rng: &mut ChaCha20Rng, max: usize, rec: &mut Recorder) -> Result<(), BitError> {
    let s = rng.random_range(1..=max);
    let d = random_joint(rng, s, s)?;
    let p_eq: f64 = (0..s).map(|i| d.prob(i, i)).sum();
    rec.record(Lemma::Equality, p_eq, 2f64.powf(-avg_min_entropy(&d)));
    Ok(())
}

fn check_neighborhood_once(rng: &mut ChaCha20Rng, n: usize, rec: &mut Recorder) -> Result<(), BitError> {
    let size = 1usize << n;
    let d = random_joint(rng, size, size)?;
    let radius = rng.random_range(1..=n + 1);
    let ball = neighborhood_size(n, radius)?;
    let ball: f64 = ball.to_string().parse().expect("ball size fits f64");
    let mut p_hit = 0.0;
    for x in 0..size {
        for y in 0..size {
            let dist = (x ^ y).count_ones() as usize;
            if dist < radius {
                p_hit += d.prob(x, y);
            }
        }
    }
    rec.record(Lemma::Neighborhood, p_hit, ball * 2f64.powf(-avg_min_entropy(&d)));
    Ok(())
}
