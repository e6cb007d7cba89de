use serde::{Deserialize, Serialize};

use super::design::StackedDesign;
use super::objective::gradient;
use super::solver::{fit_penalized, FitOutcome, SolverOptions};
use super::PenaltySpec;
use crate::error::{Error, Result};
use crate::model::ParameterSet;

/// Log-spaced grid from `λ_max` down to `ratio · λ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub len: usize,
    pub ratio: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { len: 100, ratio: 1e-4 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.len == 0 || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidInput(format!("invalid lambda grid: length {} ratio {}", self.len, self.ratio)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub fit: FitOutcome,
}

impl PathPoint {
    pub fn active_set(&self) -> Vec<usize> {
        self.fit.active_set()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub lambda_max: f64,
    pub weights: Vec<Option<f64>>,
    pub points: Vec<PathPoint>,
}

impl PathResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.fit.converged)
    }

    pub fn max_kkt_residual(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.fit.kkt_residual))
    }
}

/// Main-effects-only fit (all `α = 0`).
pub fn intercept_only(design: &StackedDesign, options: &SolverOptions) -> Result<FitOutcome> {
    let penalty = PenaltySpec {
        lambda: 0.0,
        weights: vec![None; design.k()],
    };
    let options = SolverOptions {
        kkt_tol: options.kkt_tol.min(1e-8),
        ..options.clone()
    };
    fit_penalized(design, &penalty, None, &options)
}

/// Smallest `λ` at which every penalized coefficient is zero:
/// `max_k |∂l/∂α_k| / w_k` at `α = 0` with main effects at their
/// intercept-only optimum.
pub fn lambda_max(design: &StackedDesign, weights: &[Option<f64>], null_fit: &ParameterSet) -> f64 {
    let grad = gradient(design, null_fit);
    grad.alpha
        .iter()
        .zip(weights)
        .filter_map(|(g, w)| w.map(|w| g.abs() / w))
        .fold(0.0, f64::max)
}

pub fn default_lambda_grid(lambda_max: f64, spec: GridSpec) -> Vec<f64> {
    if spec.len == 1 {
        return vec![lambda_max];
    }
    let top = lambda_max.ln();
    let step = spec.ratio.ln() / (spec.len - 1) as f64;
    (0..spec.len)
        .map(|i| if i == 0 { lambda_max } else { (top + step * i as f64).exp() })
        .collect()
}

/// Warm-started regularization path. When `lambda_grid` is `None` the grid is
/// built from `grid` and `λ_max`; a supplied grid is sorted descending.
pub fn fit_path(design: &StackedDesign, weights: &[Option<f64>], lambda_grid: Option<&[f64]>, grid: GridSpec, options: &SolverOptions) -> Result<PathResult> {
    if weights.len() != design.k() {
        return Err(Error::Dimension(format!("{} weights for {} columns", weights.len(), design.k())));
    }
    let null_fit = intercept_only(design, options)?;
    let lmax = lambda_max(design, weights, &null_fit.params);
    let lambdas = match lambda_grid {
        Some(g) => {
            if g.is_empty() || g.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return Err(Error::InvalidInput("lambda grid must be non-empty, finite and non-negative".into()));
            }
            let mut g = g.to_vec();
            g.sort_by(|a, b| b.total_cmp(a));
            g
        }
        None => {
            grid.validate()?;
            // A zero gradient means every λ gives the null fit; keep a usable grid.
            let top = if lmax > 0.0 { lmax } else { 1.0 };
            default_lambda_grid(top, grid)
        }
    };
    let mut points = Vec::with_capacity(lambdas.len());
    let mut warm = null_fit.params.clone();
    for &lambda in &lambdas {
        let penalty = PenaltySpec::new(lambda, weights.to_vec())?;
        let fit = fit_penalized(design, &penalty, Some(&warm), options)?;
        warm = fit.params.clone();
        points.push(PathPoint { lambda, fit });
    }
    Ok(PathResult {
        lambda_max: lmax,
        weights: weights.to_vec(),
        points,
    })
}
