//! Monte Carlo benchmark harness: fixed synthetic truth, repeated simulated
//! datasets, several estimators per dataset, aggregated accuracy tables.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::{neighborhood_lasso, NeighborhoodConfig};
use crate::error::{Error, Result};
use crate::estimator::{
    adaptive_weights, build_design, fit_oracle, fit_path, fit_unregularized, lasso_weights, FitOutcome, GridSpec, PathResult, SolverOptions, StackedDesign,
};
use crate::metrics::{mse_alpha, mse_theta, sse_alpha, sse_theta, theta_error, tpr_fpr, SelectionTruth};
use crate::model::{assemble_theta, BinaryDataset, InteractionMatrix, ParameterSet, SimilarityKind, SimilarityMatrix};
use crate::numeric::median;
use crate::sampler::{sample, substream, SamplerConfig, SamplerMethod};
use crate::selection::{cross_validate, select_ic, Criterion, FoldPlan};

/// Stream index reserved for drawing the true parameters of a scenario.
const TRUTH_STREAM: u64 = u64::MAX;
/// Stream index reserved for per-replicate seeds.
const REPLICATE_STREAM: u64 = u64::MAX - 1;

/// Design decisions in effect for every fit and benchmark run. Their hash is
/// stamped into report metadata.
pub const DECISIONS: &[&str] = &[
    "pseudo-likelihood loss scaled by 1/(np)",
    "proximal Newton solver: quadratic model with main effects profiled out, cyclic coordinate descent with soft-thresholding, backtracking line search",
    "convergence: KKT residual <= kkt_tol (1e-6 on the scaled loss, 1e-8 for unpenalized refits), at most 200 Newton iterations",
    "adaptive weights 1/|pilot|; pilot coefficients below 1e-10 are excluded unless an epsilon is given",
    "lambda grid: log-spaced from lambda_max, default 100 points down to 1e-4 lambda_max",
    "cross-validation folds group observations; ties go to the larger lambda",
    "information criteria: df = active coefficients + p, N = np",
    "Wald intervals use the refit on the active set and the observation-clustered sandwich covariance",
    "Gibbs sampler: random-scan sweeps, fresh chain per observation unless draws_per_chain > 1",
    "theta error: Frobenius norm over off-diagonal entries",
    "MSE normalization: alpha by K, main effects by p",
];

pub fn decisions_fingerprint() -> String {
    let mut h = Sha256::new();
    for d in DECISIONS {
        h.update(d.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchEstimator {
    Oracle,
    Regularized,
    RegularizedAic,
    RegularizedBic,
    Lasso,
    Unregularized,
    Neighborhood,
}

impl BenchEstimator {
    pub fn name(self) -> &'static str {
        match self {
            BenchEstimator::Oracle => "Oracle",
            BenchEstimator::Regularized => "Regularized",
            BenchEstimator::RegularizedAic => "Regularized-AIC",
            BenchEstimator::RegularizedBic => "Regularized-BIC",
            BenchEstimator::Lasso => "Lasso",
            BenchEstimator::Unregularized => "Unregularized",
            BenchEstimator::Neighborhood => "Neighborhood",
        }
    }

    fn is_penalized(self) -> bool {
        matches!(self, BenchEstimator::Regularized | BenchEstimator::RegularizedAic | BenchEstimator::RegularizedBic | BenchEstimator::Lasso)
    }
}

/// Settings of the synthetic truth. `α⁰_k` is `±U[alpha_min, alpha_max]` on
/// the first `k0` matrices and zero elsewhere; main effects are
/// `U[theta_min, theta_max]`; each similarity matrix is a random 0/1 graph
/// with about `neighbors` neighbors per node and degree at most `max_degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSettings {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub neighbors: f64,
    pub max_degree: usize,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        Self {
            alpha_min: 0.1,
            alpha_max: 0.3,
            theta_min: -1.0,
            theta_max: 0.0,
            neighbors: 2.0,
            max_degree: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    /// `None` picks exact sampling when `p` is enumerable.
    pub method: Option<SamplerMethod>,
    pub burn_in: usize,
    pub thin: usize,
    pub draws_per_chain: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        let d = SamplerConfig::default();
        Self {
            method: None,
            burn_in: d.burn_in,
            thin: d.thin,
            draws_per_chain: d.draws_per_chain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub k0: usize,
    pub replicates: usize,
    pub seed: u64,
    pub estimators: Vec<BenchEstimator>,
    pub folds: usize,
    pub grid: GridSpec,
    pub generator: GeneratorSettings,
    pub sampler: SamplerSettings,
    /// Grid used by the neighborhood baseline for each response.
    pub baseline_grid: GridSpec,
    pub baseline_folds: usize,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: "default".into(),
            n: 400,
            p: 25,
            k: 20,
            k0: 5,
            replicates: 100,
            seed: 1,
            estimators: vec![BenchEstimator::Oracle, BenchEstimator::Regularized, BenchEstimator::Lasso, BenchEstimator::Unregularized],
            folds: FoldPlan::DEFAULT_FOLDS,
            grid: GridSpec::default(),
            generator: GeneratorSettings::default(),
            sampler: SamplerSettings::default(),
            baseline_grid: GridSpec { len: 30, ratio: 1e-2 },
            baseline_folds: 5,
        }
    }
}

/// Scenario file: a list of `[[scenario]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: Vec<ScenarioSpec>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("scenario {}: {m}", self.name)));
        if self.p < 2 || self.n < 2 {
            return bad(format!("need n >= 2 and p >= 2, got n = {}, p = {}", self.n, self.p));
        }
        if self.k == 0 || self.k0 == 0 || self.k0 > self.k {
            return bad(format!("need 1 <= k0 <= k, got k = {}, k0 = {}", self.k, self.k0));
        }
        if self.replicates == 0 || self.estimators.is_empty() {
            return bad("need at least one replicate and one estimator".into());
        }
        let g = &self.generator;
        if !(0.0 <= g.alpha_min && g.alpha_min <= g.alpha_max && g.theta_min <= g.theta_max && g.neighbors >= 0.0) {
            return bad("invalid generator ranges".into());
        }
        if self.folds < 2 || self.folds > self.n {
            return bad(format!("invalid fold count {}", self.folds));
        }
        self.grid.validate()?;
        self.baseline_grid.validate()?;
        Ok(())
    }

    pub fn sampler_config(&self, seed: u64) -> SamplerConfig {
        let base = SamplerConfig::auto(self.p, seed);
        SamplerConfig {
            method: self.sampler.method.unwrap_or(base.method),
            seed,
            burn_in: self.sampler.burn_in,
            thin: self.sampler.thin,
            draws_per_chain: self.sampler.draws_per_chain,
        }
    }
}

/// True parameters and similarity matrices of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTruth {
    pub truth: SelectionTruth,
    pub sims: Vec<SimilarityMatrix>,
    pub theta: InteractionMatrix,
}

/// Random symmetric 0/1 matrix with zero diagonal, expected degree
/// `neighbors` and degrees capped at `max_degree`.
pub fn random_graph<R: Rng + ?Sized>(p: usize, neighbors: f64, max_degree: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let q = if p > 1 { (neighbors / (p - 1) as f64).min(1.0) } else { 0.0 };
    let mut pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let mut degree = vec![0usize; p];
    let mut edges = Vec::new();
    for (a, b) in pairs {
        if rng.random::<f64>() < q && degree[a] < max_degree && degree[b] < max_degree {
            degree[a] += 1;
            degree[b] += 1;
            edges.push((a, b));
        }
    }
    edges.sort_unstable();
    edges
}

pub fn generate_truth(spec: &ScenarioSpec) -> Result<ScenarioTruth> {
    spec.validate()?;
    let g = &spec.generator;
    let mut rng = substream(spec.seed, TRUTH_STREAM);
    let alpha: Vec<f64> = (0..spec.k)
        .map(|k| {
            if k < spec.k0 {
                let mag = rng.random_range(g.alpha_min..=g.alpha_max);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            } else {
                0.0
            }
        })
        .collect();
    let main_effects: Vec<f64> = (0..spec.p).map(|_| rng.random_range(g.theta_min..=g.theta_max)).collect();
    let sims = (0..spec.k)
        .map(|k| {
            let edges = random_graph(spec.p, g.neighbors, g.max_degree, &mut rng);
            let mut m = nalgebra::DMatrix::zeros(spec.p, spec.p);
            for (a, b) in edges {
                m[(a, b)] = 1.0;
                m[(b, a)] = 1.0;
            }
            SimilarityMatrix::new(format!("W{}", k + 1), SimilarityKind::Adjacency, m)
        })
        .collect::<Result<Vec<_>>>()?;
    let params = ParameterSet::new(main_effects, alpha)?;
    let theta = assemble_theta(&params, &sims)?;
    Ok(ScenarioTruth {
        truth: SelectionTruth::from_params(params),
        sims,
        theta,
    })
}

pub fn dataset_hash(data: &BinaryDataset) -> String {
    let mut h = Sha256::new();
    h.update((data.n() as u64).to_le_bytes());
    h.update((data.p() as u64).to_le_bytes());
    h.update(data.raw());
    hex::encode(h.finalize())
}

/// Seed of the dataset of replicate `r`.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    let mut rng = substream(seed, REPLICATE_STREAM);
    rng.set_word_pos(2 * r as u128);
    rng.next_u64()
}

pub fn simulate_replicate(spec: &ScenarioSpec, truth: &ScenarioTruth, r: usize) -> Result<BinaryDataset> {
    let config = spec.sampler_config(replicate_seed(spec.seed, r));
    sample(spec.n, &truth.truth.params, &truth.sims, &config)
}

/// Scores of one estimator on one replicate. Accuracy fields are `None`
/// when the fit failed or the estimator has no such output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub estimator: BenchEstimator,
    pub dataset_hash: String,
    pub failed: bool,
    pub converged: bool,
    pub message: Option<String>,
    pub lambda: Option<f64>,
    pub mse_alpha: Option<f64>,
    pub mse_theta: Option<f64>,
    pub sse_alpha: Option<f64>,
    pub sse_theta: Option<f64>,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub active: Option<Vec<usize>>,
    pub theta_error: Option<f64>,
}

impl ReplicateRecord {
    fn empty(replicate: usize, estimator: BenchEstimator, dataset_hash: &str) -> Self {
        Self {
            replicate,
            estimator,
            dataset_hash: dataset_hash.to_string(),
            failed: false,
            converged: true,
            message: None,
            lambda: None,
            mse_alpha: None,
            mse_theta: None,
            sse_alpha: None,
            sse_theta: None,
            tpr: None,
            fpr: None,
            active: None,
            theta_error: None,
        }
    }

    fn failure(replicate: usize, estimator: BenchEstimator, dataset_hash: &str, message: String) -> Self {
        Self {
            failed: true,
            converged: false,
            message: Some(message),
            ..Self::empty(replicate, estimator, dataset_hash)
        }
    }
}

fn score_fit(rec: &mut ReplicateRecord, fit: &FitOutcome, truth: &ScenarioTruth, estimator: BenchEstimator) -> Result<()> {
    if fit.has_divergence() {
        rec.failed = true;
        rec.message = Some("diverging coefficient".into());
        return Ok(());
    }
    rec.converged = fit.converged;
    rec.mse_alpha = Some(mse_alpha(&fit.params, &truth.truth)?);
    rec.mse_theta = Some(mse_theta(&fit.params, &truth.truth)?);
    rec.sse_alpha = Some(sse_alpha(&fit.params, &truth.truth)?);
    rec.sse_theta = Some(sse_theta(&fit.params, &truth.truth)?);
    if estimator.is_penalized() {
        let active = fit.active_set();
        let (tpr, fpr) = tpr_fpr(&active, &truth.truth)?;
        rec.tpr = Some(tpr);
        rec.fpr = fpr;
        rec.active = Some(active);
    }
    rec.theta_error = Some(theta_error(&assemble_theta(&fit.params, &truth.sims)?, &truth.theta)?);
    Ok(())
}

/// Path for the given weights, with the index chosen by each requested rule.
struct TunedPath {
    path: PathResult,
    cv: Option<usize>,
    aic: Option<usize>,
    bic: Option<usize>,
}

fn tuned_path(design: &StackedDesign, weights: &[Option<f64>], spec: &ScenarioSpec, seed: u64, want: (bool, bool, bool), solver: &SolverOptions) -> Result<TunedPath> {
    let path = fit_path(design, weights, None, spec.grid, solver)?;
    let cv = if want.0 {
        let plan = FoldPlan::new(design.n_obs(), spec.folds, seed)?;
        Some(cross_validate(design, weights, &plan, &path.lambdas(), solver, false)?.index)
    } else {
        None
    };
    let aic = if want.1 { Some(select_ic(design, &path, Criterion::Aic)?.index) } else { None };
    let bic = if want.2 { Some(select_ic(design, &path, Criterion::Bic)?.index) } else { None };
    Ok(TunedPath { path, cv, aic, bic })
}

/// Fits every requested estimator to one dataset.
pub fn run_replicate(spec: &ScenarioSpec, truth: &ScenarioTruth, r: usize) -> Vec<ReplicateRecord> {
    let solver = SolverOptions::default();
    let data = match simulate_replicate(spec, truth, r) {
        Ok(d) => d,
        Err(e) => return spec.estimators.iter().map(|&est| ReplicateRecord::failure(r, est, "", format!("simulation failed: {e}"))).collect(),
    };
    let hash = dataset_hash(&data);
    let design = match build_design(&data, &truth.sims) {
        Ok(d) => d,
        Err(e) => return spec.estimators.iter().map(|&est| ReplicateRecord::failure(r, est, &hash, e.to_string())).collect(),
    };
    let fold_seed = replicate_seed(spec.seed, r) ^ 0x9e37_79b9_7f4a_7c15;
    let has = |e: BenchEstimator| spec.estimators.contains(&e);
    let needs_pilot = has(BenchEstimator::Unregularized) || has(BenchEstimator::Regularized) || has(BenchEstimator::RegularizedAic) || has(BenchEstimator::RegularizedBic);
    let pilot = needs_pilot.then(|| fit_unregularized(&design, true));
    let adaptive = if has(BenchEstimator::Regularized) || has(BenchEstimator::RegularizedAic) || has(BenchEstimator::RegularizedBic) {
        Some(match &pilot {
            Some(Ok(p)) => {
                let weights = adaptive_weights(&p.params, None);
                let want = (has(BenchEstimator::Regularized), has(BenchEstimator::RegularizedAic), has(BenchEstimator::RegularizedBic));
                tuned_path(&design, &weights, spec, fold_seed, want, &solver)
            }
            Some(Err(e)) => Err(Error::Numerical(format!("pilot fit failed: {e}"))),
            None => unreachable!(),
        })
    } else {
        None
    };
    let lasso = has(BenchEstimator::Lasso).then(|| tuned_path(&design, &lasso_weights(design.k()), spec, fold_seed, (true, false, false), &solver));

    spec.estimators
        .iter()
        .map(|&est| {
            let mut rec = ReplicateRecord::empty(r, est, &hash);
            let outcome: Result<()> = (|| {
                let from_path = |tp: &Option<Result<TunedPath>>, pick: fn(&TunedPath) -> Option<usize>| -> Result<(FitOutcome, f64)> {
                    match tp {
                        Some(Ok(tp)) => {
                            let pt = &tp.path.points[pick(tp).expect("requested rule")];
                            Ok((pt.fit.clone(), pt.lambda))
                        }
                        Some(Err(e)) => Err(Error::Numerical(e.to_string())),
                        None => unreachable!(),
                    }
                };
                let (fit, lambda) = match est {
                    BenchEstimator::Oracle => (fit_oracle(&design, &truth.truth.support, &solver)?, None),
                    BenchEstimator::Unregularized => match &pilot {
                        Some(Ok(p)) => (p.clone(), None),
                        Some(Err(e)) => return Err(Error::Numerical(e.to_string())),
                        None => unreachable!(),
                    },
                    BenchEstimator::Regularized => from_path(&adaptive, |t| t.cv).map(|(f, l)| (f, Some(l)))?,
                    BenchEstimator::RegularizedAic => from_path(&adaptive, |t| t.aic).map(|(f, l)| (f, Some(l)))?,
                    BenchEstimator::RegularizedBic => from_path(&adaptive, |t| t.bic).map(|(f, l)| (f, Some(l)))?,
                    BenchEstimator::Lasso => from_path(&lasso, |t| t.cv).map(|(f, l)| (f, Some(l)))?,
                    BenchEstimator::Neighborhood => {
                        let config = NeighborhoodConfig {
                            folds: spec.baseline_folds,
                            grid: spec.baseline_grid,
                            seed: fold_seed,
                            solver: solver.clone(),
                        };
                        let nb = neighborhood_lasso(&data, &config)?;
                        rec.theta_error = Some(theta_error(&nb.theta, &truth.theta)?);
                        return Ok(());
                    }
                };
                rec.lambda = lambda;
                score_fit(&mut rec, &fit, truth, est)
            })();
            if let Err(e) = outcome {
                rec = ReplicateRecord::failure(r, est, &hash, e.to_string());
            }
            rec
        })
        .collect()
}

/// Aggregate over the successful replicates of one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: BenchEstimator,
    pub successes: usize,
    pub failures: usize,
    pub not_converged: usize,
    /// Mean `MSE_α` multiplied by 1000.
    pub mse_alpha_x1000: Option<f64>,
    pub mse_theta: Option<f64>,
    pub sse_alpha: Option<f64>,
    pub sse_theta: Option<f64>,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub theta_error_mean: Option<f64>,
    pub theta_error_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub schema_version: u32,
    pub package_version: String,
    pub seed: u64,
    pub decisions_fingerprint: String,
    pub decisions: Vec<String>,
    pub theta_error_norm: String,
    pub mse_normalization: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: ReportMetadata,
    pub scenario: ScenarioSpec,
    pub truth: ScenarioTruth,
    pub summary: Vec<EstimatorSummary>,
    pub records: Vec<ReplicateRecord>,
}

impl BenchmarkReport {
    pub fn summary_for(&self, estimator: BenchEstimator) -> Option<&EstimatorSummary> {
        self.summary.iter().find(|s| s.estimator == estimator)
    }
}

fn mean_of(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Summaries per estimator, in the order of `estimators`. Records are sorted
/// by replicate first, so the result does not depend on their order.
pub fn summarize(records: &[ReplicateRecord], estimators: &[BenchEstimator]) -> Vec<EstimatorSummary> {
    let mut by_est: BTreeMap<BenchEstimator, Vec<&ReplicateRecord>> = BTreeMap::new();
    for rec in records {
        by_est.entry(rec.estimator).or_default().push(rec);
    }
    estimators
        .iter()
        .map(|&est| {
            let mut recs = by_est.remove(&est).unwrap_or_default();
            recs.sort_by_key(|r| r.replicate);
            let ok: Vec<&&ReplicateRecord> = recs.iter().filter(|r| !r.failed).collect();
            let collect = |f: fn(&ReplicateRecord) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let theta_errors = collect(|r| r.theta_error);
            EstimatorSummary {
                estimator: est,
                successes: ok.len(),
                failures: recs.len() - ok.len(),
                not_converged: ok.iter().filter(|r| !r.converged).count(),
                mse_alpha_x1000: mean_of(&collect(|r| r.mse_alpha)).map(|v| v * 1000.0),
                mse_theta: mean_of(&collect(|r| r.mse_theta)),
                sse_alpha: mean_of(&collect(|r| r.sse_alpha)),
                sse_theta: mean_of(&collect(|r| r.sse_theta)),
                tpr: mean_of(&collect(|r| r.tpr)),
                fpr: mean_of(&collect(|r| r.fpr)),
                theta_error_mean: mean_of(&theta_errors),
                theta_error_median: median(&theta_errors),
            }
        })
        .collect()
}

pub fn report_metadata(seed: u64) -> ReportMetadata {
    ReportMetadata {
        schema_version: crate::selection::SCHEMA_VERSION,
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        decisions_fingerprint: decisions_fingerprint(),
        decisions: DECISIONS.iter().map(|s| s.to_string()).collect(),
        theta_error_norm: "frobenius, off-diagonal".into(),
        mse_normalization: "alpha: 1/K, main effects: 1/p".into(),
    }
}

pub fn run_benchmark(spec: &ScenarioSpec) -> Result<BenchmarkReport> {
    let truth = generate_truth(spec)?;
    let records: Vec<ReplicateRecord> = (0..spec.replicates).into_par_iter().flat_map_iter(|r| run_replicate(spec, &truth, r)).collect();
    let summary = summarize(&records, &spec.estimators);
    Ok(BenchmarkReport {
        metadata: report_metadata(spec.seed),
        scenario: spec.clone(),
        truth,
        summary,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graphs_respect_degree_cap() {
        let mut rng = substream(3, 0);
        let edges = random_graph(40, 3.0, 4, &mut rng);
        let mut deg = vec![0; 40];
        for &(a, b) in &edges {
            assert!(a < b);
            deg[a] += 1;
            deg[b] += 1;
        }
        assert!(deg.iter().all(|&d| d <= 4));
        assert!(!edges.is_empty());
    }

    #[test]
    fn truth_is_reproducible() {
        let spec = ScenarioSpec {
            p: 8,
            k: 4,
            k0: 2,
            ..Default::default()
        };
        let a = generate_truth(&spec).unwrap();
        assert_eq!(a, generate_truth(&spec).unwrap());
        assert_eq!(a.truth.support, vec![0, 1]);
        assert!(a.truth.params.alpha[..2].iter().all(|v| (0.1..=0.3).contains(&v.abs())));
        assert!(a.truth.params.main_effects.iter().all(|v| (-1.0..=0.0).contains(v)));
    }

    #[test]
    fn summary_ignores_record_order() {
        let mk = |r: usize, v: f64| ReplicateRecord {
            mse_alpha: Some(v),
            theta_error: Some(v),
            ..ReplicateRecord::empty(r, BenchEstimator::Oracle, "")
        };
        let recs = vec![mk(0, 0.1), mk(1, 0.2), mk(2, 0.7), ReplicateRecord::failure(3, BenchEstimator::Oracle, "", "x".into())];
        let mut rev = recs.clone();
        rev.reverse();
        let a = summarize(&recs, &[BenchEstimator::Oracle]);
        assert_eq!(a, summarize(&rev, &[BenchEstimator::Oracle]));
        assert_eq!(a[0].failures, 1);
        assert_eq!(a[0].successes, 3);
        assert_eq!(a[0].theta_error_median, Some(0.2));
    }

    #[test]
    fn fingerprint_is_stable_hex() {
        let f = decisions_fingerprint();
        assert_eq!(f.len(), 64);
        assert_eq!(f, decisions_fingerprint());
    }
}
