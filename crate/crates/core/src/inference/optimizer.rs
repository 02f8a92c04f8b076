//! Deterministic optimisation over the mean parameter `t` of a prior set:
//! a coarse simplex grid followed by Nelder-Mead restarts in logistic
//! coordinates.

use crate::dirichlet::PriorSet;
use crate::error::Result;
use crate::estimate::Estimate;
use crate::exec::Execution;

/// Floor applied to grid coordinates when mapping them to logistic space.
const LOGISTIC_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    /// Sign turning the objective into a cost to minimise.
    fn sign(self) -> f64 {
        match self {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        }
    }
}

/// Points `i / (g - 1)` of the closed simplex, lexicographic in `i`.
pub fn simplex_grid(k: usize, per_dim: usize) -> Vec<Vec<f64>> {
    let steps = per_dim.saturating_sub(1).max(1);
    let mut out = Vec::new();
    let mut current = vec![0usize; k];
    fn rec(pos: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        let k = cur.len();
        if pos == k - 1 {
            cur[pos] = left;
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[pos] = c;
            rec(pos + 1, left - c, steps, cur, out);
        }
    }
    rec(0, steps, steps, &mut current, &mut out);
    out
}

/// Logistic coordinates: `p = softmax(z_1, ..., z_{k-1}, 0)`.
pub fn from_logistic(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(0.0f64, f64::max);
    let mut p: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    p.push((-max).exp());
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

pub fn to_logistic(p: &[f64]) -> Vec<f64> {
    let last = p[p.len() - 1].max(LOGISTIC_FLOOR).ln();
    p[..p.len() - 1]
        .iter()
        .map(|v| v.max(LOGISTIC_FLOOR).ln() - last)
        .collect()
}

/// Nelder-Mead minimisation of a fallible objective.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
    xtol: f64,
) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x)?;
        simplex.push((x, fx));
    }
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= ftol || diameter <= xtol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |c: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(m, w)| m + c * (m - w))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let reflected = along(1.0, &worst);
        let fr = f(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = along(2.0, &worst);
            let fe = f(&expanded)?;
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let c = along(0.5, &worst);
            let fc = f(&c)?;
            (c, fc)
        } else {
            let c = along(-0.5, &worst);
            let fc = f(&c)?;
            (c, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&entry.0)
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            let fx = f(&x)?;
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Ok((x, fx, iter))
}

/// Optimum of an objective over a prior set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Extremum {
    pub estimate: Estimate,
    /// Mean parameter at which the optimum was found.
    pub t: Vec<f64>,
    pub evaluations: usize,
}

pub struct SearchSettings {
    pub grid_per_dim: usize,
    pub refine_iters: usize,
    pub restarts: usize,
    pub ftol: f64,
    pub execution: Execution,
}

/// Optimises `objective(t)` over `{t : t_i >= gap}`.
pub fn optimize<F>(
    prior_set: &PriorSet,
    sense: Sense,
    settings: &SearchSettings,
    objective: F,
) -> Result<Extremum>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync + Send,
{
    let grid = simplex_grid(prior_set.k(), settings.grid_per_dim);
    let values: Vec<Result<Estimate>> = settings
        .execution
        .map_slice(&grid, |p| objective(&prior_set.clip(p)));
    let mut scored = Vec::with_capacity(grid.len());
    for (i, v) in values.into_iter().enumerate() {
        scored.push((i, v?));
    }
    // stable: ties keep the lowest lexicographic grid index
    scored.sort_by(|a, b| match sense {
        Sense::Maximize => b.1.value.total_cmp(&a.1.value),
        Sense::Minimize => a.1.value.total_cmp(&b.1.value),
    });
    let mut evaluations = grid.len();
    let (best_idx, best_est) = scored[0];
    let mut best = Extremum {
        estimate: best_est,
        t: prior_set.clip(&grid[best_idx]),
        evaluations: 0,
    };

    let starts: Vec<usize> = scored
        .iter()
        .take(settings.restarts)
        .map(|(i, _)| *i)
        .collect();
    let refined = settings.execution.map_slice(&starts, |&i| {
        let z0 = to_logistic(&grid[i]);
        let mut count = 0usize;
        let res = nelder_mead(
            |z| {
                count += 1;
                let t = prior_set.clip(&from_logistic(z));
                Ok(sense.sign() * objective(&t)?.value)
            },
            &z0,
            1.0,
            settings.refine_iters,
            settings.ftol,
            1e-9,
        );
        res.map(|(z, _, _)| (z, count))
    });
    for r in refined {
        let (z, count) = r?;
        evaluations += count;
        let t = prior_set.clip(&from_logistic(&z));
        let est = objective(&t)?;
        evaluations += 1;
        if sense.better(est.value, best.estimate.value) {
            best = Extremum {
                estimate: est,
                t,
                evaluations: 0,
            };
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_sizes_and_order() {
        let g = simplex_grid(2, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], vec![0.0, 1.0]);
        assert_eq!(g[10], vec![1.0, 0.0]);
        // C(10 + 2, 2)
        assert_eq!(simplex_grid(3, 11).len(), 66);
        for p in simplex_grid(4, 5) {
            assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn logistic_round_trip() {
        let p = [0.2, 0.5, 0.3];
        let back = from_logistic(&to_logistic(&p));
        for (a, b) in p.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
        let extreme = from_logistic(&[-800.0, 0.0]);
        assert!(extreme.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, fx, _) = nelder_mead(
            |z| Ok((z[0] - 1.5).powi(2) + 3.0 * (z[1] + 0.5).powi(2)),
            &[0.0, 0.0],
            1.0,
            500,
            1e-14,
            1e-10,
        )
        .unwrap();
        assert_relative_eq!(x[0], 1.5, epsilon = 1e-5);
        assert_relative_eq!(x[1], -0.5, epsilon = 1e-5);
        assert!(fx < 1e-10);
    }

    #[test]
    fn optimize_prefers_lowest_index_on_ties() {
        let ps = PriorSet::with_gap(1.0, 2, 1e-3).unwrap();
        let settings = SearchSettings {
            grid_per_dim: 11,
            refine_iters: 50,
            restarts: 3,
            ftol: 1e-12,
            execution: Execution::Sequential,
        };
        let flat = optimize(&ps, Sense::Maximize, &settings, |_| {
            Ok(Estimate::closed_form(0.5))
        })
        .unwrap();
        assert_relative_eq!(flat.t[0], 1e-3);
    }
}
