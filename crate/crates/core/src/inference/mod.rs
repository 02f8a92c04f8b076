//! Lower and upper expectations over a near-ignorance prior set.

mod appendix;
pub mod optimizer;
mod vacuity;

pub use appendix::{
    concentration_experiment, concentration_spec, ratio_experiment, ConcentrationPoint, RatioPoint,
};
pub use optimizer::Extremum;
pub use vacuity::{vacuity_check, LadderPoint, SuperlevelCheck, VacuityReport, Verdict};

use serde::{Deserialize, Serialize};

use crate::channels::{Channel, CompiledLikelihood};
use crate::data::ManifestDataset;
use crate::dirichlet::{moment, PriorSet};
use crate::error::{Error, Result};
use crate::estimate::{BoundPair, Estimate};
use crate::exec::Execution;
use crate::quadrature::{posterior_expectation_compiled, QuadratureConfig};
use crate::simplex::CountVector;
use optimizer::{optimize, SearchSettings, Sense};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub coarse_grid_per_dim: usize,
    pub refine_iters: usize,
    pub restarts: usize,
    /// Boundary gaps swept by the vacuity check, strictly decreasing.
    pub boundary_ladder: Vec<f64>,
    /// Factor applied to continue the ladder past its last entry while a
    /// predicted vacuous bound has not converged.
    pub ladder_step: f64,
    /// Smallest gap the extended ladder may reach.
    pub ladder_floor: f64,
    pub tol: f64,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            coarse_grid_per_dim: 11,
            refine_iters: 200,
            restarts: 3,
            boundary_ladder: (1..=8).map(|e| 10f64.powi(-e)).collect(),
            ladder_step: 1e-4,
            ladder_floor: 1e-250,
            tol: 1e-6,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.coarse_grid_per_dim < 2 {
            return bad("coarse_grid_per_dim", "need at least 2 points".into());
        }
        if self.restarts == 0 {
            return bad("restarts", "need at least one restart".into());
        }
        if self.boundary_ladder.is_empty() {
            return bad("boundary_ladder", "ladder is empty".into());
        }
        if self.boundary_ladder.iter().any(|g| g.is_nan() || *g <= 0.0) {
            return bad("boundary_ladder", "gaps must be positive".into());
        }
        if self.boundary_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return bad("boundary_ladder", "gaps must be strictly decreasing".into());
        }
        if !(self.ladder_step > 0.0 && self.ladder_step < 1.0) {
            return bad(
                "ladder_step",
                format!("{} must lie in (0, 1)", self.ladder_step),
            );
        }
        if self.ladder_floor.is_nan() || self.ladder_floor <= 0.0 {
            return bad("ladder_floor", "must be positive".into());
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol", "must be positive".into());
        }
        Ok(())
    }

    fn search(&self) -> SearchSettings {
        SearchSettings {
            grid_per_dim: self.coarse_grid_per_dim,
            refine_iters: self.refine_iters,
            restarts: self.restarts,
            ftol: 1e-3 * self.tol,
            execution: self.execution,
        }
    }
}

fn check_dims(prior_set: &PriorSet, k: usize, counts: &CountVector) -> Result<()> {
    for actual in [k, counts.len()] {
        if actual != prior_set.k() {
            return Err(Error::DimensionMismatch {
                expected: prior_set.k(),
                actual,
            });
        }
    }
    Ok(())
}

fn extremum(
    prior_set: &PriorSet,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
    sense: Sense,
) -> Result<Extremum> {
    check_dims(prior_set, likelihood.k(), counts)?;
    qcfg.validate()?;
    ocfg.validate()?;
    optimize(prior_set, sense, &ocfg.search(), |t| {
        let spec = prior_set.member(t.to_vec())?;
        posterior_expectation_compiled(&spec, likelihood, counts, qcfg)
    })
}

/// Upper posterior predictive probability of a future dataset with counts
/// `counts`: the supremum over the prior set of `E(prod theta_i^{n_i} | s)`.
pub fn upper_expectation(
    prior_set: &PriorSet,
    channel: &Channel,
    data: &ManifestDataset,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
) -> Result<Extremum> {
    let likelihood = channel.compile(data)?;
    upper_expectation_compiled(prior_set, &likelihood, counts, qcfg, ocfg)
}

pub fn upper_expectation_compiled(
    prior_set: &PriorSet,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
) -> Result<Extremum> {
    extremum(prior_set, likelihood, counts, qcfg, ocfg, Sense::Maximize)
}

/// Lower posterior predictive probability; mirror of [`upper_expectation`].
pub fn lower_expectation(
    prior_set: &PriorSet,
    channel: &Channel,
    data: &ManifestDataset,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
) -> Result<Extremum> {
    let likelihood = channel.compile(data)?;
    lower_expectation_compiled(prior_set, &likelihood, counts, qcfg, ocfg)
}

pub fn lower_expectation_compiled(
    prior_set: &PriorSet,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
) -> Result<Extremum> {
    extremum(prior_set, likelihood, counts, qcfg, ocfg, Sense::Minimize)
}

/// Posterior bounds together with the optimising means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBounds {
    pub bounds: BoundPair,
    pub argmin_t: Vec<f64>,
    pub argmax_t: Vec<f64>,
}

pub fn posterior_bounds(
    prior_set: &PriorSet,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
) -> Result<PosteriorBounds> {
    let lo = lower_expectation_compiled(prior_set, likelihood, counts, qcfg, ocfg)?;
    let hi = upper_expectation_compiled(prior_set, likelihood, counts, qcfg, ocfg)?;
    Ok(PosteriorBounds {
        bounds: BoundPair::new(lo.estimate, hi.estimate),
        argmin_t: lo.t,
        argmax_t: hi.t,
    })
}

/// Prior lower/upper expectation of the monomial (closed-form moments).
pub fn prior_bounds(
    prior_set: &PriorSet,
    counts: &CountVector,
    ocfg: &OptimizerConfig,
) -> Result<PosteriorBounds> {
    if counts.len() != prior_set.k() {
        return Err(Error::DimensionMismatch {
            expected: prior_set.k(),
            actual: counts.len(),
        });
    }
    ocfg.validate()?;
    let objective = |t: &[f64]| -> Result<Estimate> {
        let spec = prior_set.member(t.to_vec())?;
        Ok(Estimate::closed_form(moment(&spec, counts)?))
    };
    let settings = ocfg.search();
    let lo = optimize(prior_set, Sense::Minimize, &settings, objective)?;
    let hi = optimize(prior_set, Sense::Maximize, &settings, objective)?;
    Ok(PosteriorBounds {
        bounds: BoundPair::new(lo.estimate, hi.estimate),
        argmin_t: lo.t,
        argmax_t: hi.t,
    })
}

/// Closed-form single-outcome predictive bounds of the identity-channel
/// model: `[n_i / (N + s), (n_i + s) / (N + s)]`.
pub fn idm_bounds(observed: &CountVector, s: f64, next_outcome: usize) -> Result<BoundPair> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: format!("strength must be positive and finite, got {s}"),
        });
    }
    if next_outcome >= observed.len() {
        return Err(Error::OutOfRange("next outcome"));
    }
    let n_i = observed.counts()[next_outcome] as f64;
    let n = observed.total() as f64;
    Ok(BoundPair::exact(n_i / (n + s), (n_i + s) / (n + s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::IdentityChannel;
    use approx::assert_relative_eq;

    fn counts(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    fn identity2() -> Channel {
        Channel::Identity(IdentityChannel::new(2).unwrap())
    }

    #[test]
    fn idm_bounds_examples() {
        let b = idm_bounds(&counts(&[0, 0]), 1.0, 0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
        let b = idm_bounds(&counts(&[3, 1]), 2.0, 0).unwrap();
        assert_relative_eq!(b.lower, 0.5);
        assert_relative_eq!(b.upper, 5.0 / 6.0);
        let b = idm_bounds(&counts(&[0, 5]), 1.0, 0).unwrap();
        assert_eq!(b.lower, 0.0);
        assert_relative_eq!(b.upper, 1.0 / 6.0);
        assert!(idm_bounds(&counts(&[0, 5]), 0.0, 0).is_err());
        assert!(idm_bounds(&counts(&[0, 5]), 1.0, 2).is_err());
    }

    #[test]
    fn symmetric_pair_moment_optimum() {
        let ps = PriorSet::new(1.0, 2).unwrap();
        let up = upper_expectation(
            &ps,
            &identity2(),
            &ManifestDataset::discrete([]),
            &counts(&[1, 1]),
            &QuadratureConfig::default(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(up.estimate.value, 0.125, epsilon = 1e-6);
        assert_relative_eq!(up.t[0], 0.5, epsilon = 1e-4);
    }

    #[test]
    fn prior_single_outcome_bounds_are_nearly_vacuous() {
        let ps = PriorSet::new(1.0, 2).unwrap();
        let data = ManifestDataset::discrete([]);
        let q = QuadratureConfig::default();
        let o = OptimizerConfig::default();
        let up = upper_expectation(&ps, &identity2(), &data, &counts(&[1, 0]), &q, &o).unwrap();
        assert!(up.estimate.value >= 1.0 - 1e-6);
        let lo = lower_expectation(&ps, &identity2(), &data, &counts(&[1, 0]), &q, &o).unwrap();
        assert!(lo.estimate.value <= 1e-6);
        let c = lower_expectation(&ps, &identity2(), &data, &counts(&[0, 0]), &q, &o).unwrap();
        assert_eq!(c.estimate.value, 1.0);
    }

    #[test]
    fn identity_posterior_bounds_match_idm() {
        let ps = PriorSet::new(2.0, 2).unwrap();
        let data = ManifestDataset::from_symbol_counts(&[3, 1]);
        let q = QuadratureConfig::default();
        let o = OptimizerConfig::default();
        let up = upper_expectation(&ps, &identity2(), &data, &counts(&[1, 0]), &q, &o).unwrap();
        let lo = lower_expectation(&ps, &identity2(), &data, &counts(&[1, 0]), &q, &o).unwrap();
        assert_relative_eq!(up.estimate.value, 5.0 / 6.0, epsilon = 1e-6);
        assert_relative_eq!(lo.estimate.value, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn prior_bounds_closed_form() {
        let ps = PriorSet::new(3.0, 3).unwrap();
        let b = prior_bounds(&ps, &counts(&[1, 1, 0]), &OptimizerConfig::default()).unwrap();
        // sup of s t_i t_j / (s + 1) is at t_i = t_j = 1/2
        assert_relative_eq!(b.bounds.upper, 3.0 / (4.0 * 4.0), epsilon = 1e-6);
        assert!(b.bounds.lower < 1e-6);
    }

    #[test]
    fn ladder_validation() {
        let mut o = OptimizerConfig::default();
        o.boundary_ladder = vec![1e-2, 1e-1];
        assert!(o.validate().is_err());
        o.boundary_ladder = vec![];
        assert!(o.validate().is_err());
    }
}
