//! Property-based invariants across modules.

use latent_idm::channels::{binary_test_channel, Channel, DiscreteChannel, IdentityChannel};
use latent_idm::data::{ManifestDataset, Observation};
use latent_idm::dirichlet::{moment, DirichletSpec};
use latent_idm::inference::{
    idm_bounds, lower_expectation, posterior_bounds, upper_expectation, OptimizerConfig,
};
use latent_idm::quadrature::{posterior_expectation, Estimator, QuadratureConfig};
use latent_idm::simplex::{frequencies, log_monomial_max};
use latent_idm::{Chances, CountVector, PriorSet};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn simplex_point(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn counts(c: &[u64]) -> CountVector {
    CountVector::new(c.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { rng_seed: RngSeed::Fixed(0x1d3), ..ProptestConfig::with_cases(64) })]

    #[test]
    fn monomial_never_exceeds_its_max(c in prop::collection::vec(0u64..8, 3), theta in simplex_point(3)) {
        prop_assume!(c.iter().sum::<u64>() > 0);
        let cv = counts(&c);
        let lmax = log_monomial_max(&cv).unwrap();
        prop_assert!(cv.log_monomial(&theta) <= lmax + 1e-12);
        let f = frequencies(&cv).unwrap();
        prop_assert!((cv.log_monomial(f.values()) - lmax).abs() < 1e-12);
    }

    #[test]
    fn moment_chain_rule(s in 0.1f64..10.0, t in simplex_point(3), a in prop::collection::vec(0u64..5, 3), b in prop::collection::vec(0u64..5, 3)) {
        let spec = DirichletSpec::new(s, t).unwrap();
        prop_assert_eq!(moment(&spec, &CountVector::zeros(3).unwrap()).unwrap(), 1.0);
        let ca = counts(&a);
        let cb = counts(&b);
        // E[f_a f_b] = E[f_a] * E_{post a}[f_b]
        let joint = moment(&spec, &ca.merged(&cb).unwrap()).unwrap();
        let post = latent_idm::dirichlet::posterior_update(&spec, &ca).unwrap();
        let chained = moment(&spec, &ca).unwrap() * moment(&post, &cb).unwrap();
        prop_assert!((joint - chained).abs() <= 1e-12 * joint.max(1e-300).max(chained));
    }

    #[test]
    fn moment_decreases_when_a_count_grows(s in 0.1f64..10.0, t in simplex_point(3), a in prop::collection::vec(0u64..5, 3), i in 0usize..3) {
        let spec = DirichletSpec::new(s, t).unwrap();
        let mut b = a.clone();
        b[i] += 1;
        prop_assert!(moment(&spec, &counts(&b)).unwrap() <= moment(&spec, &counts(&a)).unwrap());
    }

    #[test]
    fn discrete_likelihood_is_affine_and_sums_to_one(rows in prop::collection::vec(simplex_point(3), 2), w in 0.0f64..1.0, th1 in simplex_point(2), th2 in simplex_point(2)) {
        let ch = Channel::Discrete(DiscreteChannel::new(rows).unwrap());
        let a = Chances::new(th1).unwrap();
        let b = Chances::new(th2).unwrap();
        let mix = a.mix(&b, w).unwrap();
        let mut total = 0.0;
        for o in 0..3 {
            let obs = Observation::Symbol(o);
            let la = ch.likelihood_point(&obs, &a).unwrap();
            let lb = ch.likelihood_point(&obs, &b).unwrap();
            let lm = ch.likelihood_point(&obs, &mix).unwrap();
            prop_assert!((lm - ((1.0 - w) * la + w * lb)).abs() < 1e-14);
            total += lm;
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positivity_implies_positive_vertices(e1 in 0.0f64..0.5, e2 in 0.0f64..0.5, syms in prop::collection::vec(0usize..2, 0..12)) {
        let ch = Channel::Discrete(binary_test_channel(e1, e2).unwrap());
        let data = ManifestDataset::discrete(syms);
        let report = ch.strict_positivity_report(&data).unwrap();
        let lik = ch.compile(&data).unwrap();
        let vertex_min = [[1.0, 0.0], [0.0, 1.0]]
            .iter()
            .map(|v| lik.log_eval(v))
            .fold(f64::INFINITY, f64::min);
        if report.strictly_positive {
            prop_assert!(vertex_min > f64::NEG_INFINITY);
        } else {
            let w = report.witness.unwrap();
            prop_assert_eq!(lik.log_eval(w.values()), f64::NEG_INFINITY);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { rng_seed: RngSeed::Fixed(0x1d3), ..ProptestConfig::with_cases(24) })]

    #[test]
    fn gauss_rule_is_converged(s in 0.2f64..5.0, t in 0.01f64..0.99, e in 0.01f64..0.4, np in 0u64..15, nm in 0u64..15) {
        let spec = DirichletSpec::new(s, vec![t, 1.0 - t]).unwrap();
        let ch = Channel::Discrete(binary_test_channel(e, e).unwrap());
        let data = ManifestDataset::from_symbol_counts(&[np, nm]);
        let run = |nodes| {
            let cfg = QuadratureConfig { gauss_nodes: nodes, ..Default::default() };
            posterior_expectation(&spec, &ch, &data, &counts(&[1, 0]), &cfg).unwrap().value
        };
        prop_assert!((run(256) - run(512)).abs() < 1e-8);
    }

    #[test]
    fn empty_data_reproduces_the_prior(s in 0.2f64..5.0, t2 in simplex_point(2), t3 in simplex_point(3), c2 in prop::collection::vec(0u64..4, 2), c3 in prop::collection::vec(0u64..4, 3)) {
        let empty = ManifestDataset::empty(latent_idm::ObservationKind::Discrete);
        let cfg = QuadratureConfig { mc_samples: 20_000, ..Default::default() };

        let spec = DirichletSpec::new(s, t2).unwrap();
        let ch = Channel::Identity(IdentityChannel::new(2).unwrap());
        let est = posterior_expectation(&spec, &ch, &empty, &counts(&c2), &cfg).unwrap();
        prop_assert!((est.value - moment(&spec, &counts(&c2)).unwrap()).abs() < 1e-10);

        let spec = DirichletSpec::new(s, t3).unwrap();
        let ch = Channel::Identity(IdentityChannel::new(3).unwrap());
        let est = posterior_expectation(&spec, &ch, &empty, &counts(&c3), &cfg).unwrap();
        let exact = moment(&spec, &counts(&c3)).unwrap();
        prop_assert!((est.value - exact).abs() <= 3.0 * est.std_error + 1e-12, "{} vs {} +- {}", est.value, exact, est.std_error);
    }

    #[test]
    fn bounds_are_invariant_to_likelihood_scale(s in 0.5f64..3.0, e in 0.05f64..0.4, np in 0u64..10, nm in 0u64..10, scale in -50.0f64..50.0) {
        let ps = PriorSet::with_gap(s, 2, 1e-4).unwrap();
        let ch = Channel::Discrete(binary_test_channel(e, e / 2.0).unwrap());
        let lik = ch.compile(&ManifestDataset::from_symbol_counts(&[np, nm])).unwrap();
        let q = QuadratureConfig::default();
        let o = OptimizerConfig::default();
        let base = posterior_bounds(&ps, &lik, &counts(&[1, 0]), &q, &o).unwrap().bounds;
        let scaled = posterior_bounds(&ps, &lik.clone().with_log_offset(scale), &counts(&[1, 0]), &q, &o).unwrap().bounds;
        prop_assert!((base.lower - scaled.lower).abs() < 1e-12);
        prop_assert!((base.upper - scaled.upper).abs() < 1e-12);
        prop_assert!(base.lower <= base.upper + base.lower_meta.band() + base.upper_meta.band());
    }

    #[test]
    fn shrinking_the_prior_set_never_widens_bounds(s in 0.5f64..3.0, e in 0.05f64..0.4, np in 0u64..8, nm in 0u64..8) {
        let ch = Channel::Discrete(binary_test_channel(e, e).unwrap());
        let lik = ch.compile(&ManifestDataset::from_symbol_counts(&[np, nm])).unwrap();
        let q = QuadratureConfig::default();
        let o = OptimizerConfig::default();
        let wide = posterior_bounds(&PriorSet::with_gap(s, 2, 1e-6).unwrap(), &lik, &counts(&[1, 0]), &q, &o).unwrap().bounds;
        let narrow = posterior_bounds(&PriorSet::with_gap(s, 2, 1e-2).unwrap(), &lik, &counts(&[1, 0]), &q, &o).unwrap().bounds;
        prop_assert!(narrow.lower >= wide.lower - 1e-7);
        prop_assert!(narrow.upper <= wide.upper + 1e-7);
    }

    #[test]
    fn identity_channel_matches_idm(s in prop::sample::select(vec![0.5, 1.0, 2.0]), n1 in 0u64..10, n2 in 0u64..10, i in 0usize..2) {
        let ps = PriorSet::new(s, 2).unwrap();
        let id = Channel::Identity(IdentityChannel::new(2).unwrap());
        let data = ManifestDataset::from_symbol_counts(&[n1, n2]);
        let f = CountVector::uniform_outcome(2, i, 1).unwrap();
        let q = QuadratureConfig::default();
        let o = OptimizerConfig::default();
        let b = idm_bounds(&counts(&[n1, n2]), s, i).unwrap();
        let up = upper_expectation(&ps, &id, &data, &f, &q, &o).unwrap().estimate.value;
        let lo = lower_expectation(&ps, &id, &data, &f, &q, &o).unwrap().estimate.value;
        prop_assert!((up - b.upper).abs() < 1e-4);
        prop_assert!((lo - b.lower).abs() < 1e-4);
    }
}

#[test]
fn importance_sampling_agrees_with_gauss() {
    let mut agree = 0;
    for case in 0..20u64 {
        let s = 0.5 + (case % 4) as f64;
        let t = 0.1 + 0.04 * case as f64;
        let e = 0.05 + 0.01 * case as f64;
        let spec = DirichletSpec::new(s, vec![t, 1.0 - t]).unwrap();
        let ch = Channel::Discrete(binary_test_channel(e, 0.5 * e).unwrap());
        let data = ManifestDataset::from_symbol_counts(&[case % 5, (case * 3) % 7]);
        let f = counts(&[1 + case % 2, case % 3]);
        let g = posterior_expectation(&spec, &ch, &data, &f, &QuadratureConfig::default()).unwrap();
        let mc_cfg = QuadratureConfig {
            estimator: Estimator::Importance,
            seed: 1000 + case,
            ..Default::default()
        };
        let m = posterior_expectation(&spec, &ch, &data, &f, &mc_cfg).unwrap();
        if (g.value - m.value).abs() <= 3.0 * m.std_error {
            agree += 1;
        }
    }
    assert!(agree >= 19, "{agree} of 20 agree");
}

#[test]
fn symmetric_optimum_for_the_product_moment() {
    let ps = PriorSet::new(1.0, 2).unwrap();
    let id = Channel::Identity(IdentityChannel::new(2).unwrap());
    let up = upper_expectation(
        &ps,
        &id,
        &ManifestDataset::empty(latent_idm::ObservationKind::Discrete),
        &counts(&[1, 1]),
        &QuadratureConfig::default(),
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert!((up.estimate.value - 0.125).abs() < 1e-6);
    assert!((up.t[0] - 0.5).abs() < 1e-4);
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    use latent_idm::Execution;
    let spec = DirichletSpec::new(1.5, vec![0.2, 0.3, 0.5]).unwrap();
    let ch = Channel::Identity(IdentityChannel::new(3).unwrap());
    let data = ManifestDataset::from_symbol_counts(&[2, 1, 3]);
    let run = |execution| {
        let cfg = QuadratureConfig {
            execution,
            mc_samples: 50_000,
            ..Default::default()
        };
        posterior_expectation(&spec, &ch, &data, &counts(&[1, 0, 1]), &cfg).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}
