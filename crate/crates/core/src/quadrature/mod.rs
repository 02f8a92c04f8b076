//! Expectations of the predictive monomial over the simplex.
//!
//! For two categories the posterior is a Beta density times the likelihood
//! and is integrated deterministically: the integral is split at 1/2, the
//! endpoint factor `x^{a-1}` is integrated exactly against the value of the
//! smooth remainder at the vertex, and what is left is smooth enough for
//! Gauss-Legendre after the change of variable `x = u^4 / 2`. This stays
//! accurate for arbitrarily small shapes `a = s t_i`, where the posterior
//! mass collapses onto a vertex.
//!
//! For three or more categories the posterior expectation is estimated by
//! self-normalised importance sampling with the prior as proposal.

mod gauss;

pub use gauss::GaussLegendre;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::channels::{Channel, CompiledLikelihood};
use crate::data::ManifestDataset;
use crate::dirichlet::{moment, DirichletSampler, DirichletSpec};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::exec::{CompensatedSum, Execution};
use crate::simplex::{log_monomial_max, CountVector};

/// Draws per Monte Carlo batch; each batch has its own RNG stream.
pub const MC_BATCH: usize = 8192;

/// Relative evidence below which the posterior is treated as undefined.
pub const MIN_RELATIVE_EVIDENCE: f64 = 1e-300;

/// Effective sample size fraction under which an estimate is flagged.
pub const ESS_WARNING_FRACTION: f64 = 0.01;

/// Power of the change of variable `x = u^POWER / 2` near each endpoint.
const ENDPOINT_POWER: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Gauss-Legendre for `k = 2`, importance sampling otherwise.
    Auto,
    Gauss,
    Importance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss-Legendre nodes per half interval.
    pub gauss_nodes: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Floor on node coordinates when the likelihood is evaluated.
    pub interior_clip: f64,
    pub estimator: Estimator,
    pub execution: Execution,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            gauss_nodes: 256,
            mc_samples: 200_000,
            seed: 0x5eed,
            interior_clip: 1e-12,
            estimator: Estimator::Auto,
            execution: Execution::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_nodes < 16 {
            return Err(Error::InvalidParameter {
                name: "gauss_nodes",
                reason: format!("need at least 16, got {}", self.gauss_nodes),
            });
        }
        if self.mc_samples < 1000 {
            return Err(Error::InvalidParameter {
                name: "mc_samples",
                reason: format!("need at least 1000, got {}", self.mc_samples),
            });
        }
        if !(self.interior_clip >= 0.0 && self.interior_clip < 1e-3) {
            return Err(Error::InvalidParameter {
                name: "interior_clip",
                reason: format!("{} must lie in [0, 1e-3)", self.interior_clip),
            });
        }
        Ok(())
    }

    fn use_gauss(&self, k: usize) -> bool {
        match self.estimator {
            Estimator::Auto => k == 2,
            Estimator::Gauss => true,
            Estimator::Importance => false,
        }
    }
}

/// Prior expectation of the monomial; closed form.
pub fn prior_expectation(spec: &DirichletSpec, counts: &CountVector) -> Result<Estimate> {
    Ok(Estimate::closed_form(moment(spec, counts)?))
}

/// Posterior expectation `E(prod_i theta_i^{n_i} | s)` under the prior
/// `spec` and the likelihood induced by `channel` on `data`.
pub fn posterior_expectation(
    spec: &DirichletSpec,
    channel: &Channel,
    data: &ManifestDataset,
    counts: &CountVector,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let likelihood = channel.compile(data)?;
    posterior_expectation_compiled(spec, &likelihood, counts, cfg)
}

/// As [`posterior_expectation`], for a pre-compiled likelihood.
pub fn posterior_expectation_compiled(
    spec: &DirichletSpec,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let k = spec.k();
    for actual in [likelihood.k(), counts.len()] {
        if actual != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual,
            });
        }
    }
    cfg.validate()?;
    if counts.total() == 0 {
        let method = if cfg.use_gauss(k) {
            Method::Gauss1d
        } else {
            Method::McImportance
        };
        let mut e = Estimate::closed_form(1.0);
        e.method = method;
        return Ok(e);
    }
    if cfg.use_gauss(k) {
        if k != 2 {
            return Err(Error::InvalidParameter {
                name: "estimator",
                reason: format!("Gauss-Legendre needs 2 categories, got {k}"),
            });
        }
        gauss_posterior(spec, likelihood, counts, cfg)
    } else {
        importance_posterior(spec, likelihood, counts, cfg)
    }
}

/// Nodes of one half interval `x in (0, 1/2]`, where `x` is the coordinate
/// that vanishes at the endpoint.
struct HalfInterval {
    /// `ln` of the exact integral of `x^{a-1}` times the vertex value.
    ln_endpoint: [f64; 2],
    ln_vertex: [f64; 2],
    /// `ln` of quadrature weight times Jacobian times `x^{a-1}`.
    ln_measure: Vec<f64>,
    ln_smooth: Vec<[f64; 2]>,
}

/// Evaluates `ln g_r` for the numerator (`r = 0`) and denominator (`r = 1`)
/// at the point `(theta_1, theta_2)`.
fn half_interval(
    a: f64,
    b: f64,
    rule: &GaussLegendre,
    clip: f64,
    eval: &dyn Fn(f64, f64) -> [f64; 2],
) -> HalfInterval {
    let m = ENDPOINT_POWER as f64;
    let ln2 = std::f64::consts::LN_2;
    // at the vertex: x = 0, the other coordinate is 1
    let ln_vertex = eval(0.0, 1.0);
    let ln_endpoint = ln_vertex.map(|v| v - a * ln2 - a.ln());
    let mut ln_measure = Vec::with_capacity(rule.len());
    let mut ln_smooth = Vec::with_capacity(rule.len());
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let ln_u = u.ln();
        let ln_x = m * ln_u - ln2;
        let x = 0.5 * u.powi(ENDPOINT_POWER);
        let other = 1.0 - x;
        ln_measure.push(w.ln() + (m / 2.0).ln() + (m - 1.0) * ln_u + (a - 1.0) * ln_x);
        let g = eval(x.max(clip), other);
        let ln_other = other.ln();
        ln_smooth.push(g.map(|v| v + (b - 1.0) * ln_other));
    }
    HalfInterval {
        ln_endpoint,
        ln_vertex,
        ln_measure,
        ln_smooth,
    }
}

/// `ln int_0^1 x^{a-1} (1-x)^{b-1} g_r(x) dx` for both functions.
fn beta_log_integrals(left: &HalfInterval, right: &HalfInterval) -> [f64; 2] {
    let mut out = [f64::NEG_INFINITY; 2];
    for r in 0..2 {
        let mut scale = left.ln_endpoint[r].max(right.ln_endpoint[r]);
        for h in [left, right] {
            for v in &h.ln_smooth {
                scale = scale.max(v[r]);
            }
        }
        if scale == f64::NEG_INFINITY {
            continue;
        }
        let mut acc = CompensatedSum::default();
        for h in [left, right] {
            acc.add((h.ln_endpoint[r] - scale).exp());
            let vertex = (h.ln_vertex[r] - scale).exp();
            for (lm, ls) in h.ln_measure.iter().zip(&h.ln_smooth) {
                let diff = (ls[r] - scale).exp() - vertex;
                if diff != 0.0 {
                    acc.add(lm.exp() * diff);
                }
            }
        }
        let total = acc.value();
        if total > 0.0 {
            out[r] = scale + total.ln();
        }
    }
    out
}

fn gauss_posterior(
    spec: &DirichletSpec,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let rule = GaussLegendre::cached(cfg.gauss_nodes);
    let alpha = spec.alpha();
    let max_ln_l = std::cell::Cell::new(f64::NEG_INFINITY);
    let nan = std::cell::Cell::new(false);
    let eval = |t1: f64, t2: f64| -> [f64; 2] {
        let theta = [t1, t2];
        let ln_l = likelihood.log_eval(&theta);
        if ln_l.is_nan() {
            nan.set(true);
        }
        max_ln_l.set(max_ln_l.get().max(ln_l));
        [ln_l + counts.log_monomial(&theta), ln_l]
    };
    // left half: theta_1 -> 0; right half: theta_2 -> 0
    let left = half_interval(alpha[0], alpha[1], &rule, cfg.interior_clip, &|x, o| {
        eval(x, o)
    });
    let right = half_interval(alpha[1], alpha[0], &rule, cfg.interior_clip, &|x, o| {
        eval(o, x)
    });
    if nan.get() {
        return Err(Error::NonFinite);
    }
    let [ln_num, ln_den] = beta_log_integrals(&left, &right);
    let ln_evidence = ln_den - ln_beta(alpha[0], alpha[1]);
    check_evidence(ln_evidence - max_ln_l.get(), ln_evidence)?;
    Ok(Estimate::gauss(
        (ln_num - ln_den).exp(),
        2 * cfg.gauss_nodes as u64,
    ))
}

fn check_evidence(relative: f64, ln_evidence: f64) -> Result<()> {
    if relative.is_nan() || relative < MIN_RELATIVE_EVIDENCE.ln() {
        return Err(Error::ZeroEvidence {
            log_evidence: ln_evidence,
        });
    }
    Ok(())
}

/// Stream-separated RNG for batch `index`.
pub fn batch_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn importance_posterior(
    spec: &DirichletSpec,
    likelihood: &CompiledLikelihood,
    counts: &CountVector,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let k = spec.k();
    let sampler = DirichletSampler::new(spec);
    let n = cfg.mc_samples;
    let batches = n.div_ceil(MC_BATCH);
    let draws: Vec<Vec<(f64, f64)>> = cfg.execution.map(batches, |b| {
        let mut rng = batch_rng(cfg.seed, b);
        let len = MC_BATCH.min(n - b * MC_BATCH);
        let mut theta = vec![0.0; k];
        (0..len)
            .map(|_| {
                sampler.sample_into(&mut rng, &mut theta);
                (likelihood.log_eval(&theta), counts.monomial(&theta))
            })
            .collect()
    });
    let mut max_ln_l = f64::NEG_INFINITY;
    for &(ln_l, _) in draws.iter().flatten() {
        if ln_l.is_nan() {
            return Err(Error::NonFinite);
        }
        max_ln_l = max_ln_l.max(ln_l);
    }
    if max_ln_l == f64::NEG_INFINITY {
        return Err(Error::ZeroEvidence {
            log_evidence: f64::NEG_INFINITY,
        });
    }
    let mut sw = CompensatedSum::default();
    let mut swf = CompensatedSum::default();
    let mut sw2 = CompensatedSum::default();
    for &(ln_l, f) in draws.iter().flatten() {
        let w = (ln_l - max_ln_l).exp();
        sw.add(w);
        swf.add(w * f);
        sw2.add(w * w);
    }
    let (sw, swf, sw2) = (sw.value(), swf.value(), sw2.value());
    let ln_evidence = max_ln_l + (sw / n as f64).ln();
    check_evidence((sw / n as f64).ln(), ln_evidence)?;
    let value = swf / sw;
    let mut dev = CompensatedSum::default();
    for &(ln_l, f) in draws.iter().flatten() {
        let w = (ln_l - max_ln_l).exp();
        let d = w * (f - value);
        dev.add(d * d);
    }
    let ess = sw * sw / sw2;
    Ok(Estimate {
        value,
        std_error: dev.value().sqrt() / sw,
        method: Method::McImportance,
        n_samples_or_nodes: n as u64,
        ess: Some(ess),
        unreliable: ess < ESS_WARNING_FRACTION * n as f64,
    })
}

/// Mass of the superlevel set `{theta : f(theta) >= f_max - delta}` of the
/// monomial `f` under `spec`.
pub fn mass_of_superlevel_set(
    spec: &DirichletSpec,
    counts: &CountVector,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("must be positive, got {delta}"),
        });
    }
    if counts.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            actual: counts.len(),
        });
    }
    if counts.total() == 0 {
        return Ok(Estimate::closed_form(1.0));
    }
    let ln_max = log_monomial_max(counts)?;
    let f_max = ln_max.exp();
    if delta >= f_max {
        return Ok(Estimate::closed_form(1.0));
    }
    let ln_level = (f_max - delta).ln();
    if spec.k() == 2 {
        let (lo, hi) = superlevel_interval(counts, ln_level);
        let alpha = spec.alpha();
        let mass = beta_reg(alpha[0], alpha[1], hi) - beta_reg(alpha[0], alpha[1], lo);
        return Ok(Estimate::closed_form(mass.clamp(0.0, 1.0)));
    }
    cfg.validate()?;
    let sampler = DirichletSampler::new(spec);
    let n = cfg.mc_samples;
    let k = spec.k();
    let hits: Vec<u64> = cfg.execution.map(n.div_ceil(MC_BATCH), |b| {
        let mut rng = batch_rng(cfg.seed, b);
        let len = MC_BATCH.min(n - b * MC_BATCH);
        let mut theta = vec![0.0; k];
        (0..len)
            .filter(|_| {
                sampler.sample_into(&mut rng, &mut theta);
                counts.log_monomial(&theta) >= ln_level
            })
            .count() as u64
    });
    let p = hits.iter().sum::<u64>() as f64 / n as f64;
    Ok(Estimate {
        value: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        method: Method::McImportance,
        n_samples_or_nodes: n as u64,
        ess: Some(n as f64),
        unreliable: false,
    })
}

/// Endpoints in `theta_1` of `{ln f >= ln_level}` for two categories.
pub(crate) fn superlevel_interval(counts: &CountVector, ln_level: f64) -> (f64, f64) {
    let peak = counts.counts()[0] as f64 / counts.total() as f64;
    let ln_f = |x: f64| counts.log_monomial(&[x, 1.0 - x]);
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if ln_f(mid) >= ln_level {
                inside = mid;
            } else {
                outside = mid;
            }
            if (inside - outside).abs() < 1e-16 {
                break;
            }
        }
        inside
    };
    let lo = if ln_f(0.0) >= ln_level {
        0.0
    } else {
        bisect(peak, 0.0)
    };
    let hi = if ln_f(1.0) >= ln_level {
        1.0
    } else {
        bisect(peak, 1.0)
    };
    (lo, hi)
}
