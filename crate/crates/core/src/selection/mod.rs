//! Tuning-parameter selection, post-selection inference and the end-to-end
//! fitting pipeline.

mod cv;
mod ic;
mod inference;

pub use cv::{cross_validate, CvChoice, CvCurve, FoldPlan};
pub use ic::{ic_curve, select_ic, Criterion, IcChoice, IcCurve};
pub use inference::{bread_and_meat, pseudo_r2, sandwich_inference, Inference, WaldInterval, Z_95};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    adaptive_weights, build_design, check_regularity, fit_oracle, fit_path, fit_unregularized, intercept_only, lasso_weights, FitOutcome, FitWarning, GridSpec,
    PathResult, RegularityDiagnostics, SolverOptions, StackedDesign, ZERO_COEFFICIENT,
};
use crate::model::{assemble_theta, BinaryDataset, InteractionMatrix, ParameterSet, SimilarityMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Adaptive,
    Lasso,
    Unregularized,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tuning {
    Cv,
    Aic,
    Bic,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub estimator: EstimatorKind,
    /// Required for [`EstimatorKind::Oracle`].
    pub oracle_support: Option<Vec<usize>>,
    pub tuning: Tuning,
    pub folds: usize,
    pub one_se: bool,
    /// Required for [`Tuning::Fixed`].
    pub fixed_lambda: Option<f64>,
    pub grid: GridSpec,
    /// Explicit grid; overrides `grid`.
    pub lambda_grid: Option<Vec<f64>>,
    pub seed: u64,
    pub solver: SolverOptions,
    pub adaptive_epsilon: Option<f64>,
    pub inference: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorKind::Adaptive,
            oracle_support: None,
            tuning: Tuning::Cv,
            folds: FoldPlan::DEFAULT_FOLDS,
            one_se: false,
            fixed_lambda: None,
            grid: GridSpec::default(),
            lambda_grid: None,
            seed: 0,
            solver: SolverOptions::default(),
            adaptive_epsilon: None,
            inference: true,
        }
    }
}

/// Per-point summary of the full-data path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub lambda_max: f64,
    pub lambdas: Vec<f64>,
    pub active_sizes: Vec<usize>,
    pub kkt_residuals: Vec<f64>,
    pub converged: Vec<bool>,
}

impl PathSummary {
    pub fn from_path(path: &PathResult) -> Self {
        Self {
            lambda_max: path.lambda_max,
            lambdas: path.lambdas(),
            active_sizes: path.points.iter().map(|p| p.active_set().len()).collect(),
            kkt_residuals: path.points.iter().map(|p| p.fit.kkt_residual).collect(),
            converged: path.points.iter().map(|p| p.fit.converged).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub kkt_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
    pub messages: Vec<String>,
    /// Summed log pseudo-likelihood of the reported estimate.
    pub log_pseudo_likelihood: f64,
    /// Summed log pseudo-likelihood of the main-effects-only model.
    pub null_log_pseudo_likelihood: f64,
    pub pseudo_r2: Option<f64>,
    pub regularity: RegularityDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub package_version: String,
    pub seed: u64,
    pub folds: usize,
    pub one_se: bool,
    pub grid: GridSpec,
    pub explicit_lambda_grid: bool,
    pub solver: SolverOptions,
    pub adaptive_epsilon: Option<f64>,
    pub zero_threshold: f64,
    pub interval_quantile: f64,
}

/// Outcome of [`fit_model`]; serializes to the versioned result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema_version: u32,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub response_labels: Vec<String>,
    pub similarity_labels: Vec<String>,
    pub estimator: EstimatorKind,
    pub tuning: Tuning,
    /// Chosen penalty level; `None` for unpenalized estimators.
    pub lambda: Option<f64>,
    pub estimates: ParameterSet,
    pub active_set: Vec<usize>,
    pub weights: Vec<Option<f64>>,
    pub path: Option<PathSummary>,
    pub cv: Option<CvCurve>,
    pub ic: Vec<IcCurve>,
    pub inference: Option<Inference>,
    pub inference_error: Option<String>,
    pub diagnostics: Diagnostics,
    pub metadata: Metadata,
}

/// One line of the coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub coefficient: String,
    pub estimate: f64,
    pub active: bool,
    pub refit: Option<f64>,
    pub se: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl FitResult {
    /// `Θ̂` assembled from the reported estimates.
    pub fn theta(&self, sims: &[SimilarityMatrix]) -> Result<InteractionMatrix> {
        if sims.len() != self.k {
            return Err(Error::Dimension(format!("result has K = {}, got {} similarity matrices", self.k, sims.len())));
        }
        assemble_theta(&self.estimates, sims)
    }

    pub fn coefficient_rows(&self) -> Vec<CoefficientRow> {
        (0..self.k)
            .map(|k| {
                let iv = self.inference.as_ref().and_then(|inf| inf.interval(k));
                CoefficientRow {
                    coefficient: self.similarity_labels[k].clone(),
                    estimate: self.estimates.alpha[k],
                    active: self.active_set.contains(&k),
                    refit: iv.map(|w| w.estimate),
                    se: iv.map(|w| w.se),
                    lower: iv.map(|w| w.lower),
                    upper: iv.map(|w| w.upper),
                }
            })
            .collect()
    }
}

/// Builds the design, fits the configured estimator, selects `λ`, refits on
/// the active set and computes sandwich intervals.
pub fn fit_model(data: &BinaryDataset, sims: &[SimilarityMatrix], config: &FitConfig) -> Result<FitResult> {
    if sims.is_empty() {
        return Err(Error::InvalidInput("at least one similarity source required".into()));
    }
    let design = build_design(data, sims)?;
    fit_design(&design, data.labels().to_vec(), config)
}

/// [`fit_model`] on a prebuilt design.
pub fn fit_design(design: &StackedDesign, response_labels: Vec<String>, config: &FitConfig) -> Result<FitResult> {
    let k = design.k();
    let rows = design.rows() as f64;
    let solver = &config.solver;
    let mut messages = Vec::new();

    let null = intercept_only(design, solver)?;
    let mut weights = vec![None; k];
    let mut path_result = None;
    let mut cv = None;
    let mut ic = Vec::new();

    let (fit, lambda): (FitOutcome, Option<f64>) = match config.estimator {
        EstimatorKind::Unregularized => (fit_unregularized(design, solver.fit_main_effects)?, None),
        EstimatorKind::Oracle => {
            let support = config
                .oracle_support
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("the oracle estimator requires a support list".into()))?;
            weights = (0..k).map(|c| support.contains(&c).then_some(1.0)).collect();
            (fit_oracle(design, support, solver)?, None)
        }
        EstimatorKind::Adaptive | EstimatorKind::Lasso => {
            weights = if config.estimator == EstimatorKind::Adaptive {
                let pilot = fit_unregularized(design, solver.fit_main_effects)?;
                if !pilot.converged {
                    messages.push("pilot unregularized fit did not converge; adaptive weights may be unreliable".into());
                }
                let w = adaptive_weights(&pilot.params, config.adaptive_epsilon);
                let excluded: Vec<usize> = (0..k).filter(|&c| w[c].is_none()).collect();
                if !excluded.is_empty() {
                    messages.push(format!("coefficients {excluded:?} have a zero pilot estimate and are excluded"));
                }
                w
            } else {
                lasso_weights(k)
            };
            let fixed;
            let grid: Option<&[f64]> = match config.tuning {
                Tuning::Fixed => {
                    fixed = [config.fixed_lambda.ok_or_else(|| Error::InvalidInput("fixed tuning requires a lambda value".into()))?];
                    Some(&fixed)
                }
                _ => config.lambda_grid.as_deref(),
            };
            let path = fit_path(design, &weights, grid, config.grid, solver)?;
            ic = vec![ic_curve(design, &path, Criterion::Aic), ic_curve(design, &path, Criterion::Bic)];
            let index = match config.tuning {
                Tuning::Fixed => 0,
                Tuning::Aic => select_ic(design, &path, Criterion::Aic)?.index,
                Tuning::Bic => select_ic(design, &path, Criterion::Bic)?.index,
                Tuning::Cv => {
                    let plan = FoldPlan::new(design.n_obs(), config.folds, config.seed)?;
                    let choice = cross_validate(design, &weights, &plan, &path.lambdas(), solver, config.one_se)?;
                    messages.extend(choice.warnings.iter().cloned());
                    let index = choice.index;
                    cv = Some(choice.curve);
                    index
                }
            };
            let point = path.points[index].clone();
            path_result = Some(PathSummary::from_path(&path));
            (point.fit, Some(point.lambda))
        }
    };

    if !fit.converged {
        messages.push(format!("selected fit did not converge (KKT residual {:.3e})", fit.kkt_residual));
    }
    let active_set = fit.active_set();
    let (inference, inference_error) = if config.inference {
        match sandwich_inference(design, &active_set, solver) {
            Ok(inf) => (Some(inf), None),
            Err(e @ (Error::Singular { .. } | Error::Numerical(_))) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };

    let log_pl = -fit.loss * rows;
    let null_log_pl = -null.loss * rows;
    let diagnostics = Diagnostics {
        kkt_residual: fit.kkt_residual,
        converged: fit.converged,
        iterations: fit.iterations,
        warnings: fit.warnings.clone(),
        messages,
        log_pseudo_likelihood: log_pl,
        null_log_pseudo_likelihood: null_log_pl,
        pseudo_r2: pseudo_r2(log_pl, null_log_pl).ok(),
        regularity: check_regularity(design, &fit.params, &active_set),
    };

    Ok(FitResult {
        schema_version: SCHEMA_VERSION,
        n: design.n_obs(),
        p: design.n_blocks(),
        k,
        response_labels,
        similarity_labels: design.column_labels().to_vec(),
        estimator: config.estimator,
        tuning: config.tuning,
        lambda,
        estimates: fit.params,
        active_set,
        weights,
        path: path_result,
        cv,
        ic,
        inference,
        inference_error,
        diagnostics,
        metadata: Metadata {
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            folds: config.folds,
            one_se: config.one_se,
            grid: config.grid,
            explicit_lambda_grid: config.lambda_grid.is_some(),
            solver: solver.clone(),
            adaptive_epsilon: config.adaptive_epsilon,
            zero_threshold: ZERO_COEFFICIENT,
            interval_quantile: Z_95,
        },
    })
}
