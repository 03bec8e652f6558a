mod common;

use arising::graph::parent_sets;
use arising::ising::{enumerate_distribution, exact_conditional, make_spin_glass, Configuration, SpinGlassMode};
use arising::learn::{collect_stats, fit_ar_model, grise_fit, grise_solve, DataSource, SolverOptions};
use arising::{build_basis, build_lattice, make_ferromagnet, sample_exact};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // Exact conditionals on the parent sets reproduce p for any ordering.
    #[test]
    fn exact_conditionals_reproduce_joint(n in 2usize..=9, density in 0.0f64..0.5, seed: u64) {
        let mut rng = common::rng(seed);
        let g = common::random_connected_graph(n, density, &mut rng);
        let sigma = common::random_ordering(n, &mut rng);
        let m = make_spin_glass(&g, seed, SpinGlassMode::DwaveRange);
        let d = enumerate_distribution(&m).unwrap();
        let ar = common::exact_armodel(&g, &sigma, &d);
        for index in 0..1u64 << n {
            let x = Configuration::from_index(n, index);
            let lp = ar.log_prob(x.spins()).unwrap();
            prop_assert!((lp.exp() - d.prob(&x)).abs() < 1e-10);
        }
    }

    // Saturated fits on exact statistics recover the same joint.
    #[test]
    fn saturated_fit_is_exact(n in 2usize..=7, density in 0.0f64..0.5, seed: u64) {
        let mut rng = common::rng(seed);
        let g = common::random_connected_graph(n, density, &mut rng);
        let sigma = common::random_ordering(n, &mut rng);
        let m = make_spin_glass(&g, seed, SpinGlassMode::UniformUnit);
        let d = enumerate_distribution(&m).unwrap();
        let ar = fit_ar_model(&g, &sigma, n, DataSource::Exact(&d), SolverOptions { tol: 1e-10, max_iter: 10_000 }).unwrap();
        for index in 0..1u64 << n {
            let x = Configuration::from_index(n, index);
            let lp = ar.log_prob(x.spins()).unwrap();
            prop_assert!((lp - d.prob(&x).ln()).abs() < 1e-6);
        }
    }
}

#[test]
fn grise_minimizer_independent_of_start() {
    let g = build_lattice(3);
    let m = make_spin_glass(&g, 11, SpinGlassMode::UniformUnit);
    let d = enumerate_distribution(&m).unwrap();
    // exact stats give every pattern positive weight, so the minimizer is unique
    let parents = [1, 3, 5, 7];
    let stats = collect_stats(DataSource::Exact(&d), 4, &parents).unwrap();
    let basis = build_basis(4, &parents, 5).unwrap();
    let opts = SolverOptions { tol: 1e-10, max_iter: 10_000 };
    let (reference, _) = grise_fit(&stats, &basis, opts).unwrap();
    let mut rng = common::rng(3);
    for _ in 0..10 {
        let init: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (fit, report) = grise_solve(&stats, &basis, init, opts).unwrap();
        assert!(report.converged);
        for (a, b) in fit.coefficients().iter().zip(reference.coefficients()) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }
    // and the fit reproduces the exact conditional
    for bits in 0..16u64 {
        let xs = common::spins(4, bits);
        let p = exact_conditional(&d, 4, &parents, &xs).unwrap();
        assert!((reference.conditional_prob(1, &xs).unwrap() - p).abs() < 1e-6);
    }
}

#[test]
fn more_data_gives_better_coefficients() {
    let g = build_lattice(3);
    let m = make_ferromagnet(&g);
    let d = enumerate_distribution(&m).unwrap();
    let ps = parent_sets(&g, &arising::sequential(3)).unwrap();
    let parents = ps.of(4).to_vec();
    let basis = build_basis(4, &parents, parents.len() + 1).unwrap();
    let opts = SolverOptions::default();
    let (truth, _) = grise_fit(&collect_stats(DataSource::Exact(&d), 4, &parents).unwrap(), &basis, opts).unwrap();
    let mean_error = |m_samples: usize| {
        (0..20u64)
            .map(|seed| {
                let s = sample_exact(&d, m_samples, 100 + seed);
                let stats = collect_stats(DataSource::Samples(&s), 4, &parents).unwrap();
                // tiny samples can leave patterns unseen; cap iterations and keep the iterate
                let (fit, _) = grise_solve(&stats, &basis, vec![0.0; basis.len()], SolverOptions { tol: 1e-8, max_iter: 200 }).unwrap();
                fit.coefficients()
                    .iter()
                    .zip(truth.coefficients())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / 20.0
    };
    let small = mean_error(1_000);
    let large = mean_error(100_000);
    assert!(large < small, "m=1e5 error {large} not below m=1e3 error {small}");
}
