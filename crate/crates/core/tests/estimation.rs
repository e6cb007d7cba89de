use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ising_simreg::estimator::{
    adaptive_weights, build_design, fit_path, fit_penalized, fit_unregularized, gradient, intercept_only, lambda_max, lasso_weights, loss, GridSpec, PenaltySpec,
    SolverOptions, StackedDesign,
};
use ising_simreg::sampler::sample_exact;
use ising_simreg::{BinaryDataset, ParameterSet, SimilarityKind, SimilarityMatrix};

fn instance(p: usize, k: usize, n: usize, seed: u64) -> (BinaryDataset, Vec<SimilarityMatrix>, StackedDesign) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sims: Vec<SimilarityMatrix> = (0..k)
        .map(|c| {
            let mut m = DMatrix::zeros(p, p);
            for a in 0..p {
                for b in a + 1..p {
                    let v: f64 = if rng.random::<f64>() < 0.5 { 1.0 } else { rng.random_range(0.0..1.0) };
                    m[(a, b)] = v;
                    m[(b, a)] = v;
                }
            }
            SimilarityMatrix::new(format!("w{c}"), SimilarityKind::Raw, m).unwrap()
        })
        .collect();
    let main = (0..p).map(|_| rng.random_range(-1.0..0.5)).collect();
    let alpha = (0..k).map(|c| if c % 2 == 0 { rng.random_range(-0.4..0.4) } else { 0.0 }).collect();
    let truth = ParameterSet::new(main, alpha).unwrap();
    let data = sample_exact(n, &truth, &sims, seed).unwrap();
    let design = build_design(&data, &sims).unwrap();
    (data, sims, design)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_never_increases(seed in 0u64..10_000, frac in 0.01f64..0.9) {
        let (_, _, design) = instance(5, 3, 80, seed);
        let null = intercept_only(&design, &SolverOptions::default()).unwrap();
        let w = lasso_weights(3);
        let lambda = frac * lambda_max(&design, &w, &null.params);
        let fit = fit_penalized(&design, &PenaltySpec::new(lambda, w).unwrap(), None, &SolverOptions::default()).unwrap();
        for pair in fit.objective_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-15, "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn weight_scale_is_absorbed_by_lambda(seed in 0u64..10_000, c in 0.1f64..10.0, frac in 0.05f64..0.8) {
        let (_, _, design) = instance(5, 3, 80, seed);
        let options = SolverOptions { kkt_tol: 1e-10, ..SolverOptions::default() };
        let w: Vec<Option<f64>> = vec![Some(1.0), Some(2.0), Some(0.5)];
        let null = intercept_only(&design, &options).unwrap();
        let lambda = frac * lambda_max(&design, &w, &null.params);
        let a = fit_penalized(&design, &PenaltySpec::new(lambda, w.clone()).unwrap(), None, &options).unwrap();
        let scaled: Vec<Option<f64>> = w.iter().map(|v| v.map(|v| v * c)).collect();
        let b = fit_penalized(&design, &PenaltySpec::new(lambda / c, scaled).unwrap(), None, &options).unwrap();
        for (x, y) in a.params.alpha.iter().zip(&b.params.alpha) {
            prop_assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences(seed in 0u64..10_000) {
        let (_, _, design) = instance(4, 2, 40, seed);
        let point = ParameterSet::new(vec![-0.3, 0.2, 0.1, -0.5], vec![0.25, -0.15]).unwrap();
        let g = gradient(&design, &point).to_vec();
        let h = 1e-5;
        for c in 0..6 {
            let bump = |s: f64| {
                let mut v: Vec<f64> = point.main_effects.iter().chain(&point.alpha).copied().collect();
                v[c] += s;
                loss(&design, &ParameterSet::new(v[..4].to_vec(), v[4..].to_vec()).unwrap())
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            prop_assert!((fd - g[c]).abs() <= 1e-6 * g.iter().map(|x| x.abs()).fold(1e-3, f64::max));
        }
    }
}

#[test]
fn fits_are_deterministic() {
    let (_, _, design) = instance(6, 4, 120, 5);
    let w = adaptive_weights(&fit_unregularized(&design, true).unwrap().params, None);
    let a = fit_path(&design, &w, None, GridSpec { len: 20, ratio: 1e-3 }, &SolverOptions::default()).unwrap();
    let b = fit_path(&design, &w, None, GridSpec { len: 20, ratio: 1e-3 }, &SolverOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn path_points_satisfy_kkt_and_start_empty() {
    let (_, _, design) = instance(8, 5, 200, 11);
    let w = lasso_weights(5);
    let path = fit_path(&design, &w, None, GridSpec::default(), &SolverOptions::default()).unwrap();
    assert!(path.all_converged());
    assert!(path.max_kkt_residual() <= 1e-6);
    assert!(path.points[0].fit.params.alpha.iter().all(|a| *a == 0.0));
    let last = path.points.last().unwrap();
    assert!(!last.active_set().is_empty());
}

#[test]
fn supplied_grid_is_sorted_descending() {
    let (_, _, design) = instance(5, 2, 60, 3);
    let path = fit_path(&design, &lasso_weights(2), Some(&[0.001, 0.1, 0.01]), GridSpec::default(), &SolverOptions::default()).unwrap();
    assert_eq!(path.lambdas(), vec![0.1, 0.01, 0.001]);
}
