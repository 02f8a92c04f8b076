//! Frozen values checked against independent reference computations.

mod common;

use approx::assert_relative_eq;
use latent_idm::channels::{binary_test_channel, Channel, GaussianChannel, IdentityChannel};
use latent_idm::data::ManifestDataset;
use latent_idm::dirichlet::{log_density, posterior_update, DirichletSpec};
use latent_idm::inference::{idm_bounds, lower_expectation, upper_expectation, OptimizerConfig};
use latent_idm::quadrature::{posterior_expectation, QuadratureConfig};
use latent_idm::{Chances, CountVector, PriorSet};

/// `(s, t, (eps1, eps2), observed counts, future counts)`.
type NoisyCase = (f64, [f64; 2], (f64, f64), [u64; 2], [u64; 2]);

fn counts(c: &[u64]) -> CountVector {
    CountVector::new(c.to_vec()).unwrap()
}

#[test]
fn reference_integrator_reproduces_beta_means() {
    // Beta(1.5, 0.5) mean 0.75
    let m = common::beta_posterior_mean(1.5, 0.5, &|_| 1.0, &|x| x);
    assert_relative_eq!(m, 0.75, epsilon = 1e-10);
}

#[test]
fn conjugate_update_matches_reference_posterior_mean() {
    let prior = DirichletSpec::new(2.0, vec![0.5, 0.5]).unwrap();
    let post = posterior_update(&prior, &counts(&[3, 1])).unwrap();
    let reference = common::beta_posterior_mean(1.0, 1.0, &|x| x.powi(3) * (1.0 - x), &|x| x);
    assert_relative_eq!(post.t()[0], reference, epsilon = 1e-10);

    let prior = DirichletSpec::new(1.0, vec![0.5, 0.5]).unwrap();
    let post = posterior_update(&prior, &counts(&[1, 0])).unwrap();
    let reference = common::beta_posterior_mean(0.5, 0.5, &|x| x, &|x| x);
    assert_relative_eq!(post.t()[0], reference, epsilon = 1e-10);
    assert_relative_eq!(post.t()[0], 0.75, epsilon = 1e-12);
}

#[test]
fn beta_2_2_log_density() {
    let spec = DirichletSpec::new(4.0, vec![0.5, 0.5]).unwrap();
    let x: f64 = 0.3;
    // Beta(2,2) pdf 6 x (1 - x)
    let expect = (6.0 * x * (1.0 - x)).ln();
    let got = log_density(&spec, &Chances::new(vec![x, 1.0 - x]).unwrap()).unwrap();
    assert_relative_eq!(got, expect, epsilon = 1e-13);
}

#[test]
fn gauss_posterior_matches_reference_for_noisy_channels() {
    let cfg = QuadratureConfig::default();
    let cases: [NoisyCase; 4] = [
        (1.0, [0.5, 0.5], (0.1, 0.1), [3, 1], [1, 0]),
        (2.0, [0.3, 0.7], (0.05, 0.2), [0, 4], [1, 1]),
        (0.7, [0.6, 0.4], (0.2, 0.1), [5, 5], [2, 0]),
        (3.0, [0.8, 0.2], (0.3, 0.3), [1, 2], [0, 3]),
    ];
    for (s, t, (e1, e2), data, future) in cases {
        let spec = DirichletSpec::new(s, t.to_vec()).unwrap();
        let ch = Channel::Discrete(binary_test_channel(e1, e2).unwrap());
        let est = posterior_expectation(
            &spec,
            &ch,
            &ManifestDataset::from_symbol_counts(&data),
            &counts(&future),
            &cfg,
        )
        .unwrap();
        let plus = |x: f64| (1.0 - e2) * x + e1 * (1.0 - x);
        let lik = |x: f64| plus(x).powi(data[0] as i32) * (1.0 - plus(x)).powi(data[1] as i32);
        let f = |x: f64| x.powi(future[0] as i32) * (1.0 - x).powi(future[1] as i32);
        let reference = common::beta_posterior_mean(s * t[0], s * t[1], &lik, &f);
        assert_relative_eq!(est.value, reference, epsilon = 1e-9);
    }
}

#[test]
fn gauss_posterior_with_gaussian_channel() {
    let cfg = QuadratureConfig::default();
    let spec = DirichletSpec::new(1.5, vec![0.4, 0.6]).unwrap();
    let ch = Channel::Gaussian(GaussianChannel::new(vec![(0.0, 1.0), (2.0, 0.5)]).unwrap());
    let xs = [0.3, 1.9, -0.4, 2.2];
    let est = posterior_expectation(
        &spec,
        &ch,
        &ManifestDataset::continuous(xs).unwrap(),
        &counts(&[1, 0]),
        &cfg,
    )
    .unwrap();
    let phi = |x: f64, mu: f64, s: f64| {
        (-(x - mu) * (x - mu) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let lik = |th: f64| {
        xs.iter()
            .map(|&x| th * phi(x, 0.0, 1.0) + (1.0 - th) * phi(x, 2.0, 0.5))
            .product::<f64>()
    };
    let reference = common::beta_posterior_mean(0.6, 0.9, &lik, &|x| x);
    assert_relative_eq!(est.value, reference, epsilon = 1e-9);
}

#[test]
fn idm_bounds_agree_with_optimised_bounds() {
    let q = QuadratureConfig::default();
    let o = OptimizerConfig::default();
    let id = Channel::Identity(IdentityChannel::new(2).unwrap());
    for (obs, s, i) in [
        ([3u64, 1u64], 2.0, 0usize),
        ([0, 5], 1.0, 0),
        ([2, 2], 0.5, 1),
    ] {
        let ps = PriorSet::new(s, 2).unwrap();
        let data = ManifestDataset::from_symbol_counts(&obs);
        let future = CountVector::uniform_outcome(2, i, 1).unwrap();
        let b = idm_bounds(&counts(&obs), s, i).unwrap();
        let up = upper_expectation(&ps, &id, &data, &future, &q, &o).unwrap();
        let lo = lower_expectation(&ps, &id, &data, &future, &q, &o).unwrap();
        assert!((up.estimate.value - b.upper).abs() < 1e-4);
        assert!((lo.estimate.value - b.lower).abs() < 1e-4);
    }
}

#[test]
fn upper_expectation_of_single_outcome_after_data() {
    // IDM conjugate bound (n_1 + s) / (N + s)
    let ps = PriorSet::new(2.0, 2).unwrap();
    let id = Channel::Identity(IdentityChannel::new(2).unwrap());
    let up = upper_expectation(
        &ps,
        &id,
        &ManifestDataset::from_symbol_counts(&[3, 1]),
        &counts(&[1, 0]),
        &QuadratureConfig::default(),
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert_relative_eq!(up.estimate.value, 5.0 / 6.0, epsilon = 1e-6);
    assert!(up.t[0] > 1.0 - 1e-6);
}
