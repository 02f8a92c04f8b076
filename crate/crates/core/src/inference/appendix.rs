//! Concentration experiments on the density sequence
//! `p_n = Dirichlet(1, ..., n, ..., 1)` (Beta(n, 1) for two categories),
//! which piles up on a chosen vertex as `n` grows.

use serde::{Deserialize, Serialize};

use crate::channels::CompiledLikelihood;
use crate::dirichlet::{moment, DirichletSpec};
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::quadrature::{mass_of_superlevel_set, posterior_expectation_compiled, QuadratureConfig};
use crate::simplex::{frequencies, CountVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub n: u64,
    /// `E_n(f)`.
    pub expectation: f64,
    /// `P_n(Theta_delta)`.
    pub superlevel_mass: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub n: u64,
    /// `E_n(L f) / E_n(L)`.
    pub ratio: Estimate,
}

/// `Dirichlet(alpha)` with `alpha_vertex = n` and every other entry 1.
pub fn concentration_spec(n: u64, k: usize, vertex: usize) -> Result<DirichletSpec> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "sequence index must be at least 1".into(),
        });
    }
    if vertex >= k {
        return Err(Error::OutOfRange("vertex"));
    }
    let mut alpha = vec![1.0; k];
    alpha[vertex] = n as f64;
    DirichletSpec::from_alpha(&alpha)
}

fn check_increasing(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "n_list",
            reason: "must be non-empty and strictly increasing".into(),
        });
    }
    Ok(())
}

/// Trajectory of `(n, E_n(f), P_n(Theta_delta))`.
pub fn concentration_experiment(
    n_list: &[u64],
    counts: &CountVector,
    delta: f64,
    vertex: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<ConcentrationPoint>> {
    check_increasing(n_list)?;
    n_list
        .iter()
        .map(|&n| {
            let spec = concentration_spec(n, counts.len(), vertex)?;
            Ok(ConcentrationPoint {
                n,
                expectation: moment(&spec, counts)?,
                superlevel_mass: mass_of_superlevel_set(&spec, counts, delta, cfg)?,
            })
        })
        .collect()
}

/// Trajectory of `E_n(L f) / E_n(L)` for the likelihood `L`.
///
/// Fails with [`Error::DegenerateLikelihood`] when `L` vanishes at the
/// maximiser of `f`.
pub fn ratio_experiment(
    n_list: &[u64],
    counts: &CountVector,
    likelihood: &CompiledLikelihood,
    vertex: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<RatioPoint>> {
    check_increasing(n_list)?;
    if likelihood.k() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            actual: likelihood.k(),
        });
    }
    let argmax = frequencies(counts)?;
    if likelihood.log_eval(argmax.values()) == f64::NEG_INFINITY {
        return Err(Error::DegenerateLikelihood);
    }
    n_list
        .iter()
        .map(|&n| {
            let spec = concentration_spec(n, counts.len(), vertex)?;
            Ok(RatioPoint {
                n,
                ratio: posterior_expectation_compiled(&spec, likelihood, counts, cfg)?,
            })
        })
        .collect()
}
