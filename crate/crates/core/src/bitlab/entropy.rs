use num_bigint::BigUint;

use super::BitError;

/// Tolerance on the total mass of a [`JointDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Size of the open Hamming ball `{y : d(x, y) < d}` in `{0,1}^n`, i.e. `sum_{k<d} C(n, k)`.
pub fn neighborhood_size(n: usize, d: usize) -> Result<BigUint, BitError> {
    if d > n + 1 {
        return Err(BitError::Precondition(format!("radius {d} exceeds n + 1 = {}", n + 1)));
    }
    let mut total = BigUint::from(0u32);
    let mut binom = BigUint::from(1u32);
    for k in 0..d {
        total += &binom;
        // C(n, k+1) = C(n, k) * (n - k) / (k + 1), exact at every step.
        binom = binom * BigUint::from(n - k) / BigUint::from(k + 1);
    }
    Ok(total)
}

/// `neighborhood_size(n, d) / 2^n` as a float.
pub fn neighborhood_fraction(n: usize, d: usize) -> Result<f64, BitError> {
    let size = neighborhood_size(n, d)?;
    let bits = size.bits() as i64;
    // Keep 60 significant bits before converting so large n does not overflow f64.
    let shift = (bits - 60).max(0) as u64;
    let mantissa = (&size >> shift).iter_u64_digits().next().unwrap_or(0) as f64;
    Ok(mantissa * 2f64.powi(shift as i32 - n as i32))
}

/// Finite joint distribution of `(X, Y)` over labelled supports.
///
/// `probs[i][j]` is `Pr[X = xs[i], Y = ys[j]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    xs: Vec<u64>,
    ys: Vec<u64>,
    probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(xs: Vec<u64>, ys: Vec<u64>, probs: Vec<Vec<f64>>) -> Result<Self, BitError> {
        if xs.is_empty() || ys.is_empty() {
            return Err(BitError::Distribution("empty support".into()));
        }
        if probs.len() != xs.len() || probs.iter().any(|row| row.len() != ys.len()) {
            return Err(BitError::Distribution("probability table shape does not match supports".into()));
        }
        let mut total = 0.0;
        for &p in probs.iter().flatten() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(BitError::Distribution(format!("invalid probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(BitError::Distribution(format!("total mass {total} is not 1")));
        }
        Ok(Self { xs, ys, probs })
    }

    /// Builds from unnormalised non-negative weights.
    pub fn from_weights(xs: Vec<u64>, ys: Vec<u64>, mut weights: Vec<Vec<f64>>) -> Result<Self, BitError> {
        let total: f64 = weights.iter().flatten().sum();
        if !(total > 0.0) {
            return Err(BitError::Distribution("weights sum to zero".into()));
        }
        for w in weights.iter_mut().flatten() {
            *w /= total;
        }
        Self::new(xs, ys, weights)
    }

    /// Empirical joint distribution of observed `(x, y)` pairs.
    pub fn from_samples(samples: &[(u64, u64)]) -> Result<Self, BitError> {
        let mut xs: Vec<u64> = samples.iter().map(|s| s.0).collect();
        let mut ys: Vec<u64> = samples.iter().map(|s| s.1).collect();
        xs.sort_unstable();
        xs.dedup();
        ys.sort_unstable();
        ys.dedup();
        let mut w = vec![vec![0.0; ys.len()]; xs.len()];
        for (x, y) in samples {
            let i = xs.binary_search(x).expect("x label present");
            let j = ys.binary_search(y).expect("y label present");
            w[i][j] += 1.0;
        }
        Self::from_weights(xs, ys, w)
    }

    pub fn xs(&self) -> &[u64] {
        &self.xs
    }

    pub fn ys(&self) -> &[u64] {
        &self.ys
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i][j]
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ys.len()).map(|j| self.probs.iter().map(|row| row[j]).sum()).collect()
    }

    /// Joint distribution of `(X, f(Y))`.
    pub fn map_y(&self, f: impl Fn(u64) -> u64) -> Self {
        let mut zs: Vec<u64> = self.ys.iter().map(|&y| f(y)).collect();
        zs.sort_unstable();
        zs.dedup();
        let mut probs = vec![vec![0.0; zs.len()]; self.xs.len()];
        for (i, row) in self.probs.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                let z = zs.binary_search(&f(self.ys[j])).expect("image label present");
                probs[i][z] += p;
            }
        }
        Self { xs: self.xs.clone(), ys: zs, probs }
    }
}

/// `H_inf(X) = -log2 max_x Pr[X = x]`.
pub fn min_entropy(p: &[f64]) -> f64 {
    let max = p.iter().cloned().fold(0.0, f64::max);
    -max.log2()
}

/// Average min-entropy `-log2 sum_y max_x Pr[X = x, Y = y]`; all-zero columns contribute nothing.
pub fn avg_min_entropy(d: &JointDistribution) -> f64 {
    let guess: f64 = (0..d.ys.len()).map(|j| d.probs.iter().map(|row| row[j]).fold(0.0, f64::max)).sum();
    -guess.log2()
}

/// `H_0 = log2 |support|`, counting only outcomes with positive probability.
pub fn max_entropy(p: &[f64]) -> f64 {
    (p.iter().filter(|&&v| v > 0.0).count() as f64).log2()
}

/// Half the L1 distance between two distributions over the same indexed support.
pub fn statistical_distance(p: &[f64], q: &[f64]) -> Result<f64, BitError> {
    if p.len() != q.len() {
        return Err(BitError::SupportMismatch { left: p.len(), right: q.len() });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
