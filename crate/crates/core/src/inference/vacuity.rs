//! Empirical check of the vacuity theorem: with a likelihood that stays
//! positive where the predictive monomial peaks (upper bound) and on the
//! faces where it vanishes (lower bound), posterior predictive bounds under
//! the near-ignorance set equal the vacuous prior ones.
//!
//! The supremum over the open set of means is never attained, so the check
//! sweeps a ladder of boundary gaps and watches the bounds converge to
//! their vacuous values instead of evaluating a single tiny gap.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{posterior_bounds, prior_bounds, OptimizerConfig};
use crate::channels::{Channel, CompiledLikelihood, PositivityReport};
use crate::data::ManifestDataset;
use crate::dirichlet::PriorSet;
use crate::error::{Error, Result};
use crate::estimate::BoundPair;
use crate::quadrature::{batch_rng, superlevel_interval, QuadratureConfig};
use crate::simplex::{frequencies, log_monomial_max, CountVector, RelativeFrequencies};

/// Superlevel widths used to probe the limit of `inf L` over `Theta_delta`.
pub const SUPERLEVEL_DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Random ray directions used for the superlevel boundary when `k >= 3`.
const SUPERLEVEL_RAYS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    VacuousConfirmed,
    LearningPossible,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub gap: f64,
    pub prior: BoundPair,
    pub posterior: BoundPair,
}

/// Minimum of `ln L` on the boundary of `{f >= f_max - delta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperlevelCheck {
    pub delta: f64,
    pub min_log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuityReport {
    /// Both the upper and the lower hypothesis hold.
    pub hypothesis_holds: bool,
    /// `L > 0` around the maximiser of the monomial and the prior upper
    /// bound reaches its supremum.
    pub upper_hypothesis: bool,
    /// `L > 0` wherever the monomial vanishes and the prior lower bound is 0.
    pub lower_hypothesis: bool,
    pub argmax_point: RelativeFrequencies,
    pub monomial_max: f64,
    pub likelihood_at_argmax: f64,
    pub log_likelihood_at_argmax: f64,
    pub positivity: PositivityReport,
    /// `ln L(e^j)` for every vertex.
    pub vertex_log_likelihoods: Vec<f64>,
    pub superlevel_checks: Vec<SuperlevelCheck>,
    pub prior_bounds: BoundPair,
    pub posterior_bounds: BoundPair,
    pub ladder_values: Vec<LadderPoint>,
    pub ladder_monotone: bool,
    pub verdict: Verdict,
}

pub fn vacuity_check(
    prior_set: &PriorSet,
    channel: &Channel,
    data: &ManifestDataset,
    counts: &CountVector,
    qcfg: &QuadratureConfig,
    ocfg: &OptimizerConfig,
) -> Result<VacuityReport> {
    let k = prior_set.k();
    if channel.k() != k || counts.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: if channel.k() != k {
                channel.k()
            } else {
                counts.len()
            },
        });
    }
    qcfg.validate()?;
    ocfg.validate()?;
    let likelihood = channel.compile(data)?;
    let argmax = frequencies(counts)?;
    let ln_f_max = log_monomial_max(counts)?;
    let f_max = ln_f_max.exp();
    let ln_l_argmax = likelihood.log_eval(argmax.values());
    let positivity = channel.strict_positivity_report(data)?;

    let vertex_ll: Vec<f64> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            likelihood.log_eval(&e)
        })
        .collect();
    // L > 0 on every face {theta_i = 0} with n_i > 0 iff it is positive at
    // every vertex of those faces (each factor is affine with
    // non-negative weights).
    let faces_positive = counts.support().all(|i| {
        (0..k)
            .filter(|&j| j != i)
            .all(|j| vertex_ll[j] > f64::NEG_INFINITY)
    });

    let superlevel_checks: Vec<SuperlevelCheck> = SUPERLEVEL_DELTAS
        .iter()
        .map(|&delta| SuperlevelCheck {
            delta,
            min_log_likelihood: superlevel_min_log_likelihood(
                &likelihood,
                counts,
                argmax.values(),
                f_max,
                delta,
            ),
        })
        .collect();
    let near_argmax_positive = ln_l_argmax > f64::NEG_INFINITY
        && superlevel_checks
            .iter()
            .all(|c| c.min_log_likelihood > f64::NEG_INFINITY);

    let mut gaps: Vec<f64> = ocfg
        .boundary_ladder
        .iter()
        .copied()
        .filter(|&g| g < 0.5 && g * (k as f64) < 1.0)
        .collect();
    if gaps.is_empty() {
        return Err(Error::InvalidParameter {
            name: "boundary_ladder",
            reason: format!("no gap is valid for {k} categories"),
        });
    }

    let tol = ocfg.tol;
    let upper_converged = |b: &BoundPair| b.upper >= f_max - tol - b.upper_meta.band();
    let lower_converged = |b: &BoundPair| b.lower <= tol + b.lower_meta.band();

    let mut ladder = Vec::with_capacity(gaps.len());
    let step = |gap: f64| -> Result<LadderPoint> {
        let ps = prior_set.with_boundary_gap(gap)?;
        let prior = prior_bounds(&ps, counts, ocfg)?.bounds;
        let posterior = posterior_bounds(&ps, &likelihood, counts, qcfg, ocfg)?.bounds;
        Ok(LadderPoint {
            gap,
            prior,
            posterior,
        })
    };
    for &g in &gaps {
        ladder.push(step(g)?);
    }

    let last_prior = ladder.last().expect("non-empty ladder").prior;
    let upper_hypothesis = near_argmax_positive && last_prior.upper >= f_max - tol;
    let lower_hypothesis = faces_positive && last_prior.lower <= tol;

    // Extending the ladder only pays off with deterministic estimates.
    let deterministic = ladder
        .last()
        .map(|p| p.posterior.upper_meta.is_deterministic())
        .unwrap_or(false);
    if deterministic {
        loop {
            let last = ladder.last().expect("non-empty ladder");
            let pending = (upper_hypothesis && !upper_converged(&last.posterior))
                || (lower_hypothesis && !lower_converged(&last.posterior));
            let next = last.gap * ocfg.ladder_step;
            if !pending || next < ocfg.ladder_floor {
                break;
            }
            gaps.push(next);
            ladder.push(step(next)?);
        }
    }

    let ladder_monotone = ladder.windows(2).all(|w| {
        let (a, b) = (&w[0].posterior, &w[1].posterior);
        let up_slack = a.upper_meta.band() + b.upper_meta.band() + tol;
        let lo_slack = a.lower_meta.band() + b.lower_meta.band() + tol;
        b.upper >= a.upper - up_slack && b.lower <= a.lower + lo_slack
    });

    let last = *ladder.last().expect("non-empty ladder");
    let post = last.posterior;
    let reliable = !post.upper_meta.unreliable
        && !post.lower_meta.unreliable
        && post.upper_meta.band() <= tol
        && post.lower_meta.band() <= tol;
    let hypothesis_holds = upper_hypothesis && lower_hypothesis;
    let verdict = if hypothesis_holds {
        if reliable && ladder_monotone && upper_converged(&post) && lower_converged(&post) {
            Verdict::VacuousConfirmed
        } else {
            Verdict::Inconclusive
        }
    } else {
        let prior = last.prior;
        let lower_moved = post.lower > prior.lower + tol + post.lower_meta.band();
        let upper_moved = post.upper < prior.upper - tol - post.upper_meta.band();
        if lower_moved || upper_moved {
            Verdict::LearningPossible
        } else {
            Verdict::Inconclusive
        }
    };

    Ok(VacuityReport {
        hypothesis_holds,
        upper_hypothesis,
        lower_hypothesis,
        argmax_point: argmax,
        monomial_max: f_max,
        likelihood_at_argmax: ln_l_argmax.exp(),
        log_likelihood_at_argmax: ln_l_argmax,
        positivity,
        vertex_log_likelihoods: vertex_ll,
        superlevel_checks,
        prior_bounds: last.prior,
        posterior_bounds: post,
        ladder_values: ladder,
        ladder_monotone,
        verdict,
    })
}

/// Minimum of `ln L` over boundary points of the superlevel set, located by
/// bisection along rays from the maximiser.
fn superlevel_min_log_likelihood(
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    argmax: &[f64],
    f_max: f64,
    delta: f64,
) -> f64 {
    let k = argmax.len();
    if delta >= f_max {
        // the superlevel set is the whole simplex; L is minimised at a vertex
        return (0..k)
            .map(|j| {
                let mut e = vec![0.0; k];
                e[j] = 1.0;
                likelihood.log_eval(&e)
            })
            .fold(f64::INFINITY, f64::min);
    }
    let ln_level = (f_max - delta).ln();
    if k == 2 {
        let (lo, hi) = superlevel_interval(counts, ln_level);
        return likelihood
            .log_eval(&[lo, 1.0 - lo])
            .min(likelihood.log_eval(&[hi, 1.0 - hi]));
    }
    let mut targets: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();
    let mut rng = batch_rng(0, 0);
    for _ in 0..SUPERLEVEL_RAYS {
        let mut q: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        targets.push(q);
    }
    let mut min_ll = f64::INFINITY;
    for q in targets {
        let dir: Vec<f64> = q.iter().zip(argmax).map(|(a, b)| a - b).collect();
        // largest step keeping the point in the simplex
        let lambda_max = argmax
            .iter()
            .zip(&dir)
            .filter(|(_, d)| **d < 0.0)
            .map(|(a, d)| a / -d)
            .fold(f64::INFINITY, f64::min);
        if !lambda_max.is_finite() {
            continue;
        }
        let at = |lambda: f64| -> Vec<f64> {
            argmax
                .iter()
                .zip(&dir)
                .map(|(a, d)| (a + lambda * d).max(0.0))
                .collect()
        };
        let lambda = if counts.log_monomial(&at(lambda_max)) >= ln_level {
            lambda_max
        } else {
            let (mut inside, mut outside) = (0.0, lambda_max);
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if counts.log_monomial(&at(mid)) >= ln_level {
                    inside = mid;
                } else {
                    outside = mid;
                }
                if outside - inside < 1e-15 {
                    break;
                }
            }
            inside
        };
        min_ll = min_ll.min(likelihood.log_eval(&at(lambda)));
    }
    min_ll
}
