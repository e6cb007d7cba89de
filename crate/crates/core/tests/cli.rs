use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ising_simreg::io::{self, TruthDocument};
use ising_simreg::selection::FitResult;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising-simreg")).args(args).env("RUST_LOG", "info").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["simulate", "--n", "150", "--p", "6", "--k", "4", "--k0", "2", "--seed", "3", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn matrix_args(sim: &Path, k: usize) -> Vec<String> {
    (1..=k).flat_map(|c| ["--matrix".to_string(), sim.join(format!("W{c}.csv")).to_str().unwrap().to_string()]).collect()
}

fn fit(sim: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<String> = vec!["fit".into(), "--responses".into(), s(&sim.join("responses.csv")).into(), "--out".into(), s(out).into()];
    args.extend(matrix_args(sim, 4));
    args.extend(["--lambda-grid".into(), "20,1e-3".into(), "--folds".into(), "5".into()]);
    args.extend(extra.iter().map(|x| x.to_string()));
    run(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a", &[]);
    let b = simulate(dir.path(), "b", &[]);
    for f in ["responses.csv", "truth.json", "W1.csv", "W4.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let truth: TruthDocument = io::read_json(&a.join("truth.json")).unwrap();
    assert_eq!(truth.support, vec![0, 1]);
    assert_eq!(truth.similarity.len(), 4);
    let c = simulate(dir.path(), "c", &["--truth", s(&a.join("truth.json"))]);
    assert_eq!(fs::read(a.join("responses.csv")).unwrap(), fs::read(c.join("responses.csv")).unwrap());
}

#[test]
fn large_p_routes_to_gibbs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("big");
    let o = run(&["simulate", "--n", "3", "--p", "200", "--k", "2", "--k0", "1", "--burn-in", "20", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Gibbs"));
    assert!(fs::read_to_string(out.join("run.log")).unwrap().contains("sampling with Gibbs"));
    let data = io::read_responses(&out.join("responses.csv")).unwrap();
    assert_eq!((data.n(), data.p()), (3, 200));
}

#[test]
fn fit_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", &[]);
    let (a, b) = (dir.path().join("fit_a"), dir.path().join("fit_b"));
    for out in [&a, &b] {
        let o = fit(&sim, out, &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ja = fs::read(a.join("fit.json")).unwrap();
    assert_eq!(ja, fs::read(b.join("fit.json")).unwrap());
    assert_eq!(fs::read(a.join("coefficients.csv")).unwrap(), fs::read(b.join("coefficients.csv")).unwrap());
    let result: FitResult = serde_json::from_slice(&ja).unwrap();
    let data = io::read_responses(&sim.join("responses.csv")).unwrap();
    assert_eq!(result.response_labels, data.labels());
    assert_eq!((result.n, result.p, result.k), (150, 6, 4));
    let text = String::from_utf8(ja).unwrap();
    assert!(!text.contains("timestamp"));
    let log = fs::read_to_string(a.join("run.log")).unwrap();
    assert!(log.starts_with("timestamp_unix: "));
    assert!(log.contains("decision: proximal Newton solver"));
}

#[test]
fn oracle_and_bic_variants() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", &[]);
    let o = fit(&sim, &dir.path().join("oracle"), &["--penalty", "oracle", "--support", "W1,W2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: FitResult = io::read_json(&dir.path().join("oracle/fit.json")).unwrap();
    assert_eq!(r.active_set.len(), 2);
    let o = fit(&sim, &dir.path().join("bic"), &["--tune", "bic"]);
    assert!(o.status.success());
    let o = fit(&sim, &dir.path().join("bad"), &["--penalty", "oracle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--support"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", &[]);
    let o = run(&["fit", "--responses", s(&sim.join("responses.csv")), "--out", s(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least one similarity source required"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "y1,y2\n0,1\n1,7\n").unwrap();
    let o = run(&["fit", "--responses", s(&bad), "--matrix", s(&sim.join("W1.csv")), "--out", s(&dir.path().join("y"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.csv") && err.contains("row 3") && err.contains("column y2"), "{err}");

    let o = run(&["fit", "--responses", s(&dir.path().join("missing.csv")), "--matrix", s(&sim.join("W1.csv")), "--out", s(&dir.path().join("z"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.csv"));
}

#[test]
fn export_graph_policies() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", &[]);
    let out = dir.path().join("fit");
    assert!(fit(&sim, &out, &[]).status.success());
    let mut args: Vec<String> = vec!["export-graph".into(), "--fit".into(), s(&out.join("fit.json")).into()];
    args.extend(matrix_args(&sim, 4));
    let export = |policy: &str, file: &str| {
        let mut a = args.clone();
        a.extend(["--threshold".into(), policy.into(), "--out".into(), s(&dir.path().join(file)).into()]);
        let o = run(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(dir.path().join(file)).unwrap()
    };
    assert_eq!(export("none", "all.dot").matches(" -- ").count(), 15);
    assert_eq!(export("inf", "empty.dot").matches(" -- ").count(), 0);
    assert!(export("median", "median.dot").starts_with("// threshold: "));

    let o = run(&["export-graph", "--fit", s(&out.join("fit.json")), "--out", s(&dir.path().join("g.dot"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing similarity input"));
}

#[test]
fn attribute_pipeline_and_single_source_fit() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", &[]);
    let table = dir.path().join("attributes.csv");
    fs::write(&table, "name,party,age\ny1,D,40\ny2,R,51\ny3,D,45\ny4,R,60\ny5,D,38\ny6,I,47\n").unwrap();
    let schema = dir.path().join("schema.toml");
    fs::write(&schema, "standardize = true\n[columns]\nparty = \"qualitative\"\nage = \"quantitative\"\n").unwrap();
    let built = dir.path().join("built");
    let o = run(&["similarity", "build", "--attributes", s(&table), "--schema", s(&schema), "--out", s(&built)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(built.join("party.csv").exists() && built.join("age.csv").exists());

    let out = dir.path().join("single");
    let o = run(&["fit", "--responses", s(&sim.join("responses.csv")), "--matrix", s(&built.join("party.csv")), "--lambda-grid", "10,1e-2", "--folds", "5", "--out", s(&out)]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let coef = fs::read_to_string(out.join("coefficients.csv")).unwrap();
    assert_eq!(coef.lines().count(), 2);
    assert!(coef.lines().nth(1).unwrap().starts_with("party,"));

    let out = dir.path().join("attr");
    let o = run(&["fit", "--responses", s(&sim.join("responses.csv")), "--attributes", s(&table), "--schema", s(&schema), "--penalty", "none", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: FitResult = io::read_json(&out.join("fit.json")).unwrap();
    assert_eq!(r.similarity_labels, vec!["party", "age"]);

    let dot = dir.path().join("party.dot");
    let o = run(&["export-graph", "--fit", s(&out.join("fit.json")), "--attributes", s(&table), "--schema", s(&schema), "--color-by", "party", "--out", s(&dot)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&dot).unwrap().contains("category=\"R\""));
}

#[test]
fn cv_and_benchmark_commands() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", &[]);
    let mut args: Vec<String> = vec!["cv".into(), "--responses".into(), s(&sim.join("responses.csv")).into(), "--out".into(), s(&dir.path().join("cv")).into()];
    args.extend(matrix_args(&sim, 4));
    args.extend(["--lambda-grid".into(), "12,1e-2".into(), "--folds".into(), "4".into()]);
    let o = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("cv/cv.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);

    let scenarios = dir.path().join("scenarios.toml");
    fs::write(
        &scenarios,
        "[[scenario]]\nname = \"tiny\"\nn = 80\np = 5\nk = 3\nk0 = 1\nreplicates = 2\nfolds = 3\nestimators = [\"oracle\", \"regularized-bic\"]\ngrid = { len = 10, ratio = 0.01 }\n",
    )
    .unwrap();
    let o = run(&["benchmark", "--scenarios", s(&scenarios), "--out", s(&dir.path().join("bench"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("bench/tiny.csv")).unwrap();
    assert!(summary.starts_with("# schema_version: 1\n"));
    assert!(summary.contains("\nRegularized-BIC,2,"));
    assert!(dir.path().join("bench/tiny.json").exists());

    fs::write(&scenarios, "[[scenario]]\nname = \"x\"\nunknown = 3\n").unwrap();
    let o = run(&["benchmark", "--scenarios", s(&scenarios), "--out", s(&dir.path().join("bench2"))]);
    assert_eq!(o.status.code(), Some(2));
}
