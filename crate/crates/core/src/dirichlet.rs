//! Dirichlet densities `dir_{s,t}` in the (strength, mean) parameterisation,
//! their monomial moments, conjugate updates and sampling.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exec::compensated_sum;
use crate::simplex::{Chances, CountVector, SIMPLEX_INPUT_TOLERANCE};

/// One member of the near-ignorance set: strength `s` and mean `t` in the
/// open simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpec {
    s: f64,
    t: Vec<f64>,
}

impl DirichletSpec {
    pub fn new(s: f64, t: Vec<f64>) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("strength must be positive and finite, got {s}"),
            });
        }
        if t.len() < 2 {
            return Err(Error::TooFewCategories(t.len()));
        }
        for (index, &v) in t.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { index });
            }
            if v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "t",
                    reason: format!("t[{index}] = {v} is not in the open simplex"),
                });
            }
        }
        let sum: f64 = t.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_INPUT_TOLERANCE {
            return Err(Error::SumNotOne {
                sum,
                tolerance: SIMPLEX_INPUT_TOLERANCE,
            });
        }
        let t = t.into_iter().map(|v| v / sum).collect();
        Ok(Self { s, t })
    }

    /// Builds the spec from the usual concentration vector `alpha = s t`.
    pub fn from_alpha(alpha: &[f64]) -> Result<Self> {
        let s: f64 = alpha.iter().sum();
        if s.is_nan() || s <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "concentrations must be positive".into(),
            });
        }
        Self::new(s, alpha.iter().map(|a| a / s).collect())
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn k(&self) -> usize {
        self.t.len()
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.t.iter().map(|t| self.s * t).collect()
    }

    pub fn mean(&self) -> Chances {
        Chances::from_normalized(self.t.clone())
    }
}

/// `ln Gamma(x + n) - ln Gamma(x)` for `x > 0`.
pub fn ln_rising(x: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= 256 {
        compensated_sum((0..n).map(|j| (x + j as f64).ln()))
    } else {
        ln_gamma(x + n as f64) - ln_gamma(x)
    }
}

/// `ln dir_{s,t}(theta)`.
pub fn log_density(spec: &DirichletSpec, theta: &Chances) -> Result<f64> {
    if theta.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            actual: theta.len(),
        });
    }
    let mut acc = ln_gamma(spec.s);
    let mut zero_mass = false;
    for (i, (&a, &x)) in spec.alpha().iter().zip(theta.values()).enumerate() {
        acc -= ln_gamma(a);
        if x == 0.0 {
            if a < 1.0 {
                return Err(Error::BoundaryDivergence { index: i, shape: a });
            }
            if a > 1.0 {
                zero_mass = true;
            }
        } else {
            acc += (a - 1.0) * x.ln();
        }
    }
    Ok(if zero_mass { f64::NEG_INFINITY } else { acc })
}

/// `ln E[prod_i theta_i^{n_i}]` under `dir_{s,t}`.
pub fn log_moment(spec: &DirichletSpec, counts: &CountVector) -> Result<f64> {
    if counts.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            actual: counts.len(),
        });
    }
    let num: f64 = spec
        .t
        .iter()
        .zip(counts.counts())
        .map(|(&t, &n)| ln_rising(spec.s * t, n))
        .sum();
    Ok(num - ln_rising(spec.s, counts.total()))
}

/// Prior expectation of the predictive monomial, i.e. the prior
/// probability of a future dataset with these counts.
pub fn moment(spec: &DirichletSpec, counts: &CountVector) -> Result<f64> {
    log_moment(spec, counts).map(f64::exp)
}

/// Conjugate update for perfectly observed counts.
pub fn posterior_update(spec: &DirichletSpec, counts: &CountVector) -> Result<DirichletSpec> {
    if counts.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            actual: counts.len(),
        });
    }
    if counts.total() == 0 {
        return Ok(spec.clone());
    }
    let s = spec.s + counts.total() as f64;
    let t = spec
        .t
        .iter()
        .zip(counts.counts())
        .map(|(&t, &n)| (spec.s * t + n as f64) / s)
        .collect();
    Ok(DirichletSpec { s, t })
}

/// Draws from `dir_{s,t}` by normalising independent Gamma variates.
///
/// Variates are kept in log space; shapes below 1 use
/// `Gamma(a) = Gamma(a + 1) * U^{1/a}` so tiny shapes do not flush to zero
/// before normalisation.
#[derive(Debug, Clone)]
pub struct DirichletSampler {
    components: Vec<(Gamma<f64>, Option<f64>)>,
}

impl DirichletSampler {
    pub fn new(spec: &DirichletSpec) -> Self {
        let components = spec
            .alpha()
            .into_iter()
            .map(|a| {
                if a < 1.0 {
                    (
                        Gamma::new(a + 1.0, 1.0).expect("shape is positive"),
                        Some(a),
                    )
                } else {
                    (Gamma::new(a, 1.0).expect("shape is positive"), None)
                }
            })
            .collect();
        Self { components }
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Writes one draw into `out` (length `k`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.components.len());
        let mut max = f64::NEG_INFINITY;
        for (slot, (gamma, boost)) in out.iter_mut().zip(&self.components) {
            let mut lg = gamma.sample(rng).ln();
            if let Some(a) = boost {
                // (0, 1]
                let u = 1.0 - rng.random::<f64>();
                lg += u.ln() / a;
            }
            *slot = lg;
            max = max.max(lg);
        }
        let mut total = 0.0;
        for v in out.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in out.iter_mut() {
            *v /= total;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Chances {
        let mut v = vec![0.0; self.k()];
        self.sample_into(rng, &mut v);
        Chances::from_normalized(v)
    }
}

/// `n` draws from `dir_{s,t}`.
pub fn sample<R: Rng + ?Sized>(spec: &DirichletSpec, rng: &mut R, n: usize) -> Vec<Chances> {
    let sampler = DirichletSampler::new(spec);
    (0..n).map(|_| sampler.sample(rng)).collect()
}

/// The near-ignorance set `{dir_{s,t} : t in T}`, with `T` restricted to
/// `t_i >= boundary_gap` for numerical optimisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSet {
    s: f64,
    k: usize,
    boundary_gap: f64,
}

impl PriorSet {
    pub const DEFAULT_GAP: f64 = 1e-8;

    pub fn new(s: f64, k: usize) -> Result<Self> {
        Self::with_gap(s, k, Self::DEFAULT_GAP)
    }

    pub fn with_gap(s: f64, k: usize, boundary_gap: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("strength must be positive and finite, got {s}"),
            });
        }
        if k < 2 {
            return Err(Error::TooFewCategories(k));
        }
        if !(boundary_gap > 0.0 && boundary_gap < 0.5 && boundary_gap * (k as f64) < 1.0) {
            return Err(Error::InvalidParameter {
                name: "boundary_gap",
                reason: format!("{boundary_gap} must lie in (0, min(0.5, 1/k))"),
            });
        }
        Ok(Self { s, k, boundary_gap })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn boundary_gap(&self) -> f64 {
        self.boundary_gap
    }

    pub fn with_boundary_gap(&self, gap: f64) -> Result<Self> {
        Self::with_gap(self.s, self.k, gap)
    }

    /// Maps a point `p` of the closed simplex to the feasible mean
    /// `gap + (1 - k gap) p`.
    pub fn clip(&self, p: &[f64]) -> Vec<f64> {
        let scale = 1.0 - self.k as f64 * self.boundary_gap;
        p.iter().map(|v| self.boundary_gap + scale * v).collect()
    }

    pub fn member(&self, t: Vec<f64>) -> Result<DirichletSpec> {
        if t.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: t.len(),
            });
        }
        DirichletSpec::new(self.s, t)
    }
}
