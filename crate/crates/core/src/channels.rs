//! Observation channels `P(S | X)` and the likelihood `P(s | theta)` they
//! induce on the simplex.
//!
//! For every channel the per-observation likelihood is the mixture
//! `sum_j lambda_j(o) theta_j`, affine in `theta`; the dataset likelihood is
//! the product over independent observations and is handled in log space.

use serde::{Deserialize, Serialize};

use crate::data::{ManifestDataset, Observation, ObservationKind};
use crate::error::{Error, Result};
use crate::simplex::{Chances, SimplexVertex};

/// Row-sum tolerance for emission matrices.
pub const ROW_TOLERANCE: f64 = 1e-9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Row-stochastic emission matrix, `k` latent states by `m` symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChannel {
    emission: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    pub fn new(emission: Vec<Vec<f64>>) -> Result<Self> {
        if emission.len() < 2 {
            return Err(Error::TooFewCategories(emission.len()));
        }
        let m = emission[0].len();
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "emission",
                reason: "rows must have at least one symbol".into(),
            });
        }
        let mut rows = Vec::with_capacity(emission.len());
        for (row, probs) in emission.into_iter().enumerate() {
            if probs.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: probs.len(),
                });
            }
            if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidParameter {
                    name: "emission",
                    reason: format!("row {row} has a negative or non-finite entry"),
                });
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::RowNotStochastic { row, sum });
            }
            rows.push(probs.into_iter().map(|p| p / sum).collect());
        }
        Ok(Self { emission: rows })
    }

    pub fn k(&self) -> usize {
        self.emission.len()
    }

    pub fn m(&self) -> usize {
        self.emission[0].len()
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    /// `lambda_j(o) = P(S = o | X = x_j)` for every state `j`.
    pub fn column(&self, symbol: usize) -> Result<Vec<f64>> {
        if symbol >= self.m() {
            return Err(Error::UnknownSymbol {
                symbol,
                alphabet: self.m(),
            });
        }
        Ok(self.emission.iter().map(|row| row[symbol]).collect())
    }
}

/// `S_i = X_i`: the latent variable is observed directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityChannel {
    pub k: usize,
}

impl IdentityChannel {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewCategories(k));
        }
        Ok(Self { k })
    }

    pub fn to_discrete(self) -> DiscreteChannel {
        let emission = (0..self.k)
            .map(|j| {
                (0..self.k)
                    .map(|o| if o == j { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        DiscreteChannel { emission }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEmission {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianEmission {
    pub fn log_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - LN_SQRT_2PI
    }
}

/// Continuous manifest variable with a normal density per latent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    params: Vec<GaussianEmission>,
}

impl GaussianChannel {
    pub fn new(params: Vec<(f64, f64)>) -> Result<Self> {
        if params.len() < 2 {
            return Err(Error::TooFewCategories(params.len()));
        }
        for &(mu, sigma) in &params {
            if !mu.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "mu",
                    reason: format!("{mu} is not finite"),
                });
            }
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    reason: format!("{sigma} must be positive"),
                });
            }
        }
        Ok(Self {
            params: params
                .into_iter()
                .map(|(mu, sigma)| GaussianEmission { mu, sigma })
                .collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[GaussianEmission] {
        &self.params
    }

    fn log_densities(&self, x: f64) -> Vec<f64> {
        self.params.iter().map(|p| p.log_pdf(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    Identity(IdentityChannel),
    Discrete(DiscreteChannel),
    Gaussian(GaussianChannel),
}

/// Diagnostic test with states (Ill, Healthy) and symbols (+, -):
/// `P(+ | Ill) = 1 - eps2`, `P(+ | Healthy) = eps1`.
pub fn binary_test_channel(eps1: f64, eps2: f64) -> Result<DiscreteChannel> {
    if !(0.0..1.0).contains(&eps1) {
        return Err(Error::OutOfRange("eps1"));
    }
    if !(0.0..1.0).contains(&eps2) {
        return Err(Error::OutOfRange("eps2"));
    }
    DiscreteChannel::new(vec![vec![1.0 - eps2, eps2], vec![eps1, 1.0 - eps1]])
}

/// Outcome of the analytic positivity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub strictly_positive: bool,
    /// A simplex vertex at which the dataset likelihood vanishes.
    pub witness: Option<Chances>,
}

impl Channel {
    pub fn k(&self) -> usize {
        match self {
            Channel::Identity(c) => c.k,
            Channel::Discrete(c) => c.k(),
            Channel::Gaussian(c) => c.k(),
        }
    }

    pub fn kind(&self) -> ObservationKind {
        match self {
            Channel::Gaussian(_) => ObservationKind::Continuous,
            _ => ObservationKind::Discrete,
        }
    }

    /// Alphabet size for discrete channels.
    pub fn alphabet(&self) -> Option<usize> {
        match self {
            Channel::Identity(c) => Some(c.k),
            Channel::Discrete(c) => Some(c.m()),
            Channel::Gaussian(_) => None,
        }
    }

    fn check_kind(&self, obs: &Observation) -> Result<()> {
        if obs.kind() != self.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind(),
                observed: obs.kind(),
            });
        }
        Ok(())
    }

    /// Mixture weights `lambda_j(o)` scaled by `exp(-log_scale)`, together
    /// with `log_scale`.
    fn scaled_weights(&self, obs: &Observation) -> Result<(f64, Vec<f64>)> {
        self.check_kind(obs)?;
        match (self, *obs) {
            (Channel::Identity(c), Observation::Symbol(o)) => {
                if o >= c.k {
                    return Err(Error::UnknownSymbol {
                        symbol: o,
                        alphabet: c.k,
                    });
                }
                let mut w = vec![0.0; c.k];
                w[o] = 1.0;
                Ok((0.0, w))
            }
            (Channel::Discrete(c), Observation::Symbol(o)) => Ok((0.0, c.column(o)?)),
            (Channel::Gaussian(c), Observation::Real(x)) => {
                let ld = c.log_densities(x);
                let max = ld.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((max, ld.iter().map(|l| (l - max).exp()).collect()))
            }
            _ => unreachable!("kind checked above"),
        }
    }

    fn check_theta(&self, theta: &Chances) -> Result<()> {
        if theta.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                actual: theta.len(),
            });
        }
        Ok(())
    }

    /// `P(S_i = o | theta)` (a density value for continuous channels).
    pub fn likelihood_point(&self, obs: &Observation, theta: &Chances) -> Result<f64> {
        self.check_theta(theta)?;
        let (log_scale, w) = self.scaled_weights(obs)?;
        let mix: f64 = w.iter().zip(theta.values()).map(|(a, b)| a * b).sum();
        Ok(mix * log_scale.exp())
    }

    /// `ln P(s | theta)`, `-inf` when any factor vanishes.
    pub fn log_likelihood_dataset(&self, data: &ManifestDataset, theta: &Chances) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.compile(data)?.log_eval(theta.values()))
    }

    /// Pre-processes a dataset into a fast evaluator of `ln P(s | theta)`.
    pub fn compile(&self, data: &ManifestDataset) -> Result<CompiledLikelihood> {
        if !data.is_empty() && data.kind() != self.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind(),
                observed: data.kind(),
            });
        }
        let k = self.k();
        let mut terms = Vec::new();
        match self {
            Channel::Identity(_) | Channel::Discrete(_) => {
                let m = self.alphabet().expect("discrete channel");
                let counts = data.symbol_counts(m)?;
                for (o, &n) in counts.iter().enumerate() {
                    if n > 0 {
                        let (log_scale, weights) = self.scaled_weights(&Observation::Symbol(o))?;
                        terms.push(LikelihoodTerm {
                            multiplicity: n as f64,
                            log_scale,
                            weights,
                        });
                    }
                }
            }
            Channel::Gaussian(_) => {
                for obs in data.observations() {
                    let (log_scale, weights) = self.scaled_weights(obs)?;
                    terms.push(LikelihoodTerm {
                        multiplicity: 1.0,
                        log_scale,
                        weights,
                    });
                }
            }
        }
        Ok(CompiledLikelihood {
            k,
            terms,
            log_offset: 0.0,
        })
    }

    pub fn strict_positivity_report(&self, data: &ManifestDataset) -> Result<PositivityReport> {
        let compiled = self.compile(data)?;
        let witness = compiled
            .vanishing_vertex()
            .map(|j| SimplexVertex::new(j).to_chances(self.k()))
            .transpose()?;
        Ok(PositivityReport {
            strictly_positive: witness.is_none(),
            witness,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LikelihoodTerm {
    multiplicity: f64,
    log_scale: f64,
    weights: Vec<f64>,
}

/// `ln L(theta) = log_offset + sum_terms n (log_scale + ln sum_j w_j theta_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledLikelihood {
    k: usize,
    terms: Vec<LikelihoodTerm>,
    log_offset: f64,
}

impl CompiledLikelihood {
    /// The constant likelihood `L = 1` (no data).
    pub fn constant(k: usize) -> Self {
        Self {
            k,
            terms: Vec::new(),
            log_offset: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies the likelihood by `exp(offset)`.
    pub fn with_log_offset(mut self, offset: f64) -> Self {
        self.log_offset += offset;
        self
    }

    pub fn log_eval(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.k);
        let mut acc = self.log_offset;
        for term in &self.terms {
            let mix: f64 = term.weights.iter().zip(theta).map(|(w, t)| w * t).sum();
            if mix.is_nan() {
                return f64::NAN;
            }
            if mix <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += term.multiplicity * (term.log_scale + mix.ln());
        }
        acc
    }

    /// Lowest-index vertex `e^j` with `L(e^j) = 0`, if any.
    pub fn vanishing_vertex(&self) -> Option<usize> {
        (0..self.k).find(|&j| self.terms.iter().any(|t| t.weights[j] <= 0.0))
    }
}
