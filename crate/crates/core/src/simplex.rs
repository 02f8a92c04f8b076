//! Points of the closed probability simplex, outcome counts and the
//! predictive monomial `prod_i theta_i^{n_i}` built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of raw input vectors before renormalisation.
pub const SIMPLEX_INPUT_TOLERANCE: f64 = 1e-9;

/// A point of the closed simplex: the chances of a categorical process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chances(Vec<f64>);

impl Chances {
    /// Validates `raw` and renormalises it to an exact unit sum.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        validate_chances(&raw)
    }

    /// Wraps a vector already known to lie on the simplex.
    pub(crate) fn from_normalized(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2);
        Self(values)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewCategories(k));
        }
        Ok(Self(vec![1.0 / k as f64; k]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Convex combination `(1 - w) * self + w * other`.
    pub fn mix(&self, other: &Chances, w: f64) -> Result<Chances> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let v: Vec<f64> = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect();
        validate_chances(&v)
    }
}

impl std::ops::Index<usize> for Chances {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Checks simplex membership of a raw vector and renormalises it.
pub fn validate_chances(raw: &[f64]) -> Result<Chances> {
    if raw.len() < 2 {
        return Err(Error::TooFewCategories(raw.len()));
    }
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteEntry { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_INPUT_TOLERANCE {
        return Err(Error::SumNotOne {
            sum,
            tolerance: SIMPLEX_INPUT_TOLERANCE,
        });
    }
    Ok(Chances(raw.iter().map(|v| v / sum).collect()))
}

/// A vertex `e^i` of the simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexVertex {
    pub index: usize,
}

impl SimplexVertex {
    pub fn new(index: usize) -> Self {
        Self { index }
    }

    pub fn to_chances(self, k: usize) -> Result<Chances> {
        if k < 2 {
            return Err(Error::TooFewCategories(k));
        }
        if self.index >= k {
            return Err(Error::OutOfRange("vertex index"));
        }
        let mut v = vec![0.0; k];
        v[self.index] = 1.0;
        Ok(Chances(v))
    }
}

/// Outcome counts `(n_1, ..., n_k)` of a (future or observed) dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::TooFewCategories(counts.len()));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::new(vec![0; k])
    }

    /// The dataset `d^i`: `n` repetitions of outcome `index`.
    pub fn uniform_outcome(k: usize, index: usize, n: u64) -> Result<Self> {
        if index >= k {
            return Err(Error::OutOfRange("outcome index"));
        }
        let mut counts = vec![0; k];
        counts[index] = n;
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Categories with a positive count.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, _)| i)
    }

    /// `ln prod_i theta_i^{n_i}` with `0^0 = 1`.
    pub fn log_monomial(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.counts.len());
        let mut acc = 0.0;
        for (&n, &t) in self.counts.iter().zip(theta) {
            if n == 0 {
                continue;
            }
            if t <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += n as f64 * t.ln();
        }
        acc
    }

    pub fn monomial(&self, theta: &[f64]) -> f64 {
        self.log_monomial(theta).exp()
    }

    pub fn merged(&self, other: &CountVector) -> Result<CountVector> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        CountVector::new(
            self.counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Relative frequencies `n_i / N` of a non-empty count vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelativeFrequencies(Vec<f64>);

impl RelativeFrequencies {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn to_chances(&self) -> Chances {
        Chances::from_normalized(self.0.clone())
    }
}

pub fn frequencies(counts: &CountVector) -> Result<RelativeFrequencies> {
    if counts.total() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = counts.total() as f64;
    Ok(RelativeFrequencies(
        counts.counts().iter().map(|&c| c as f64 / n).collect(),
    ))
}

/// `ln max_theta prod_i theta_i^{n_i}`, attained at the relative frequencies.
pub fn log_monomial_max(counts: &CountVector) -> Result<f64> {
    if counts.total() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = counts.total() as f64;
    Ok(counts
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64 / n).ln())
        .sum())
}

/// Supremum of the predictive monomial over the simplex.
pub fn monomial_max(counts: &CountVector) -> Result<f64> {
    log_monomial_max(counts).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validate_accepts_points_and_vertices() {
        assert_eq!(validate_chances(&[0.5, 0.5]).unwrap().values(), &[0.5, 0.5]);
        assert_eq!(validate_chances(&[1.0, 0.0]).unwrap().values(), &[1.0, 0.0]);
    }

    #[test]
    fn validate_rejects_bad_sums_and_signs() {
        assert!(matches!(
            validate_chances(&[0.2, 0.3, 0.6]),
            Err(Error::SumNotOne { .. })
        ));
        assert!(matches!(
            validate_chances(&[1.1, -0.1]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            validate_chances(&[1.0]),
            Err(Error::TooFewCategories(1))
        ));
    }

    #[test]
    fn validate_renormalises_within_tolerance() {
        let c = validate_chances(&[0.5 + 4e-10, 0.5]).unwrap();
        let sum: f64 = c.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frequencies_examples() {
        let f = frequencies(&CountVector::new(vec![3, 1]).unwrap()).unwrap();
        assert_eq!(f.values(), &[0.75, 0.25]);
        let f = frequencies(&CountVector::new(vec![5, 0]).unwrap()).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0]);
        let f = frequencies(&CountVector::new(vec![2, 2, 2]).unwrap()).unwrap();
        for v in f.values() {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_eq!(
            frequencies(&CountVector::zeros(3).unwrap()),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn monomial_max_examples() {
        let m = |c: Vec<u64>| monomial_max(&CountVector::new(c).unwrap()).unwrap();
        assert_eq!(m(vec![1, 0]), 1.0);
        assert_relative_eq!(m(vec![1, 1]), 0.25, epsilon = 1e-15);
        assert_relative_eq!(m(vec![3, 1]), 0.10546875, epsilon = 1e-15);
    }

    #[test]
    fn monomial_max_matches_grid_search() {
        // brute force over a 1e-4 grid of the 1-simplex
        let counts = CountVector::new(vec![3, 1]).unwrap();
        let best = (0..=10_000)
            .map(|i| {
                let t = i as f64 * 1e-4;
                counts.monomial(&[t, 1.0 - t])
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(best, 0.10546875, epsilon = 1e-12);
    }

    #[test]
    fn zero_counts_use_the_zero_power_convention() {
        let counts = CountVector::new(vec![2, 0]).unwrap();
        assert_eq!(counts.monomial(&[1.0, 0.0]), 1.0);
        assert_eq!(counts.monomial(&[0.0, 1.0]), 0.0);
    }

    #[test]
    fn monomial_stays_finite_for_large_totals() {
        let counts = CountVector::new(vec![5_000, 5_000]).unwrap();
        let lm = log_monomial_max(&counts).unwrap();
        assert_relative_eq!(lm, 10_000.0 * 0.5f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn uniform_outcome_builds_d_i() {
        let d = CountVector::uniform_outcome(3, 1, 4).unwrap();
        assert_eq!(d.counts(), &[0, 4, 0]);
        assert_eq!(d.total(), 4);
        let f = frequencies(&d).unwrap();
        assert_eq!(f.to_chances(), SimplexVertex::new(1).to_chances(3).unwrap());
    }
}
