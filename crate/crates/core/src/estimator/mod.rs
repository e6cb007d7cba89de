//! Pseudo-likelihood estimators of the similarity regression model.
//!
//! All estimators minimize
//!
//! ```text
//! -(1/(np)) Σ_i Σ_j log f_j(y_ij | y_{i\j}; ϑ) + λ Σ_k w_k |α_k|
//! ```
//!
//! over the stacked logistic design. Main effects are never penalized.

mod design;
pub mod objective;
mod path;
mod regularity;
mod solver;

pub use design::{build_design, StackedDesign};
pub use objective::{gradient, hessian, linear_predictor, loss, penalized_objective, Gradient};
pub use path::{default_lambda_grid, fit_path, intercept_only, lambda_max, GridSpec, PathPoint, PathResult};
pub use regularity::{check_regularity, RegularityDiagnostics};
pub use solver::{fit_oracle, fit_penalized, fit_unregularized, kkt_residual, FitOutcome, FitWarning, SolverOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParameterSet;

/// `|ᾱ_k|` below this is treated as an exact zero when forming weights.
pub const ZERO_COEFFICIENT: f64 = 1e-10;

/// Penalty level and per-coefficient weights; `None` marks a coefficient
/// fixed at zero (an infinite weight).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub lambda: f64,
    pub weights: Vec<Option<f64>>,
}

impl PenaltySpec {
    pub fn new(lambda: f64, weights: Vec<Option<f64>>) -> Result<Self> {
        let spec = Self { lambda, weights };
        spec.validate()?;
        Ok(spec)
    }

    /// No penalty on any coefficient.
    pub fn unpenalized(k: usize) -> Self {
        Self {
            lambda: 0.0,
            weights: vec![Some(1.0); k],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("lambda must be finite and non-negative, got {}", self.lambda)));
        }
        for (k, w) in self.weights.iter().enumerate() {
            if let Some(w) = w {
                if !(w.is_finite() && *w > 0.0) {
                    return Err(Error::InvalidInput(format!("weight {k} must be finite and positive, got {w}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_excluded(&self, k: usize) -> bool {
        self.weights[k].is_none()
    }

    /// `λ w_k`, or infinity for excluded coefficients.
    pub fn threshold(&self, k: usize) -> f64 {
        self.weights[k].map_or(f64::INFINITY, |w| self.lambda * w)
    }

    pub fn value(&self, alpha: &[f64]) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        alpha
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| match w {
                Some(w) => self.lambda * w * a.abs(),
                None => 0.0,
            })
            .sum()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            weights: self.weights.clone(),
        }
    }
}

/// Adaptive weights `w_k = 1/|ᾱ_k|` from a pilot unregularized fit.
///
/// Coefficients with `|ᾱ_k| < ZERO_COEFFICIENT` are force-excluded, unless
/// `epsilon` is given, in which case `w_k = 1/(|ᾱ_k| + ε)` for every `k`.
pub fn adaptive_weights(unregularized: &ParameterSet, epsilon: Option<f64>) -> Vec<Option<f64>> {
    unregularized
        .alpha
        .iter()
        .map(|a| match epsilon {
            Some(eps) => Some(1.0 / (a.abs() + eps)),
            None if a.abs() < ZERO_COEFFICIENT => None,
            None => Some(1.0 / a.abs()),
        })
        .collect()
}

/// Unit weights of the plain lasso.
pub fn lasso_weights(k: usize) -> Vec<Option<f64>> {
    vec![Some(1.0); k]
}
