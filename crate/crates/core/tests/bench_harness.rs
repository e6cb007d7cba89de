use ising_simreg::bench::{generate_truth, run_benchmark, BenchEstimator, ScenarioFile, ScenarioSpec};
use ising_simreg::estimator::GridSpec;
use ising_simreg::metrics::{tpr_fpr, SelectionTruth};
use ising_simreg::ParameterSet;

fn small() -> ScenarioSpec {
    use BenchEstimator::*;
    ScenarioSpec {
        name: "small".into(),
        n: 120,
        p: 6,
        k: 4,
        k0: 2,
        replicates: 3,
        seed: 5,
        estimators: vec![Oracle, Regularized, RegularizedAic, RegularizedBic, Lasso, Unregularized, Neighborhood],
        folds: 4,
        grid: GridSpec { len: 15, ratio: 1e-2 },
        baseline_grid: GridSpec { len: 10, ratio: 1e-2 },
        baseline_folds: 3,
        ..ScenarioSpec::default()
    }
}

#[test]
fn estimators_share_each_dataset_and_reports_repeat() {
    let spec = small();
    let a = run_benchmark(&spec).unwrap();
    for r in 0..spec.replicates {
        let hashes: Vec<&str> = a.records.iter().filter(|x| x.replicate == r).map(|x| x.dataset_hash.as_str()).collect();
        assert_eq!(hashes.len(), spec.estimators.len());
        assert!(hashes.iter().all(|h| *h == hashes[0] && !h.is_empty()));
    }
    let b = run_benchmark(&spec).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let oracle = a.summary_for(BenchEstimator::Oracle).unwrap();
    assert_eq!(oracle.successes, 3);
    assert!(oracle.tpr.is_none());
    assert!(a.summary_for(BenchEstimator::Neighborhood).unwrap().theta_error_median.is_some());
    assert_eq!(a.metadata.decisions_fingerprint.len(), 64);
}

#[test]
fn selection_rates_at_the_extremes() {
    let truth = SelectionTruth::from_params(ParameterSet::new(vec![0.0; 3], vec![0.2, 0.0, -0.1, 0.0]).unwrap());
    assert_eq!(tpr_fpr(&truth.support, &truth).unwrap(), (1.0, Some(0.0)));
    assert_eq!(tpr_fpr(&[], &truth).unwrap(), (0.0, Some(0.0)));
}

#[test]
fn scenario_files_parse_with_defaults() {
    let text = r#"
[[scenario]]
name = "a"
p = 10
replicates = 5

[[scenario]]
name = "b"
estimators = ["regularized", "neighborhood"]
grid = { len = 20, ratio = 0.001 }
"#;
    let file: ScenarioFile = toml::from_str(text).unwrap();
    assert_eq!(file.scenario.len(), 2);
    assert_eq!(file.scenario[0].p, 10);
    assert_eq!(file.scenario[0].k, 20);
    assert_eq!(file.scenario[1].estimators, vec![BenchEstimator::Regularized, BenchEstimator::Neighborhood]);
    assert!(toml::from_str::<ScenarioFile>("[[scenario]]\nbogus = 1\n").is_err());
}

#[test]
fn invalid_scenarios_are_rejected() {
    let bad = ScenarioSpec { k0: 30, ..small() };
    assert!(generate_truth(&bad).is_err());
    let bad = ScenarioSpec { folds: 1, ..small() };
    assert!(run_benchmark(&bad).is_err());
}
