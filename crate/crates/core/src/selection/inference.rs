use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::objective::linear_predictor;
use crate::estimator::{fit_oracle, FitOutcome, SolverOptions, StackedDesign};
use crate::numeric::logistic;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959964;

/// Largest condition number of the bread matrix accepted as invertible.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldInterval {
    pub index: usize,
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

impl WaldInterval {
    pub fn new(index: usize, estimate: f64, se: f64) -> Self {
        Self {
            index,
            estimate,
            se,
            lower: estimate - Z_95 * se,
            upper: estimate + Z_95 * se,
        }
    }
}

/// Sandwich covariance of the refit on a selected support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub support: Vec<usize>,
    pub refit: FitOutcome,
    /// Standard errors of the main effects `θ_jj`.
    pub main_effect_se: Vec<f64>,
    /// One interval per coefficient in `support`, centered on the refit.
    pub alpha: Vec<WaldInterval>,
    /// Covariance over `(θ_11..θ_pp, α_S)`, row by row.
    pub covariance: Vec<Vec<f64>>,
    pub bread_condition: f64,
}

impl Inference {
    pub fn interval(&self, k: usize) -> Option<&WaldInterval> {
        self.alpha.iter().find(|w| w.index == k)
    }
}

/// Per-observation bread `A = Σ_i H_i` and meat `B = Σ_i s_i s_iᵀ` of the
/// summed log pseudo-likelihood, where `s_i`, `H_i` collect the `p`
/// conditional terms of observation `i`.
pub fn bread_and_meat(design: &StackedDesign, params: &crate::model::ParameterSet, support: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, p, s) = (design.n_obs(), design.n_blocks(), support.len());
    let d = p + s;
    let eta = linear_predictor(design, params);
    let cols: Vec<&[f64]> = support.iter().map(|&k| design.column(k)).collect();
    let mut a = DMatrix::zeros(d, d);
    let mut b = DMatrix::zeros(d, d);
    let mut score = DVector::zeros(d);
    let mut x = vec![0.0; s];
    for i in 0..n {
        score.fill(0.0);
        for j in 0..p {
            let r = design.row_index(i, j);
            let mu = logistic(eta[r]);
            let resid = design.response()[r] - mu;
            let w = mu * (1.0 - mu);
            for (xa, col) in x.iter_mut().zip(&cols) {
                *xa = col[r];
            }
            score[j] += resid;
            a[(j, j)] += w;
            for u in 0..s {
                score[p + u] += resid * x[u];
                a[(j, p + u)] += w * x[u];
                for v in u..s {
                    a[(p + u, p + v)] += w * x[u] * x[v];
                }
            }
        }
        b.ger(1.0, &score, &score, 1.0);
    }
    for u in 0..d {
        for v in 0..u {
            a[(u, v)] = a[(v, u)];
        }
    }
    (a, b)
}

/// Refits without penalty on `support` and returns Wald intervals from the
/// sandwich covariance `A⁻¹ B A⁻¹`.
pub fn sandwich_inference(design: &StackedDesign, support: &[usize], options: &SolverOptions) -> Result<Inference> {
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    let refit = fit_oracle(design, &support, options)?;
    if !refit.converged {
        return Err(Error::Numerical(format!(
            "refit on the selected support did not converge (KKT residual {:.3e})",
            refit.kkt_residual
        )));
    }
    let p = design.n_blocks();
    let (a, b) = bread_and_meat(design, &refit.params, &support);
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular {
            context: "sandwich bread matrix".into(),
            condition,
        });
    }
    let a_inv = a.cholesky().ok_or_else(|| Error::Singular {
        context: "sandwich bread matrix".into(),
        condition,
    })?
    .inverse();
    let cov = &a_inv * b * &a_inv;
    let se = |u: usize| cov[(u, u)].max(0.0).sqrt();
    let main_effect_se = (0..p).map(se).collect();
    let alpha = support
        .iter()
        .enumerate()
        .map(|(u, &k)| WaldInterval::new(k, refit.params.alpha[k], se(p + u)))
        .collect();
    let covariance = (0..cov.nrows()).map(|u| cov.row(u).iter().copied().collect()).collect();
    Ok(Inference {
        support,
        refit,
        main_effect_se,
        alpha,
        covariance,
        bread_condition: condition,
    })
}

/// `1 - fit/null` on the summed log pseudo-likelihood scale.
pub fn pseudo_r2(fit_loglik: f64, null_loglik: f64) -> Result<f64> {
    if !(null_loglik < 0.0) || !fit_loglik.is_finite() {
        return Err(Error::InvalidInput(format!(
            "pseudo-R² needs a negative null log pseudo-likelihood and a finite fit, got null {null_loglik}, fit {fit_loglik}"
        )));
    }
    Ok(1.0 - fit_loglik / null_loglik)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pseudo_r2_cases() {
        assert_eq!(pseudo_r2(-5.0, -5.0).unwrap(), 0.0);
        assert!((pseudo_r2(-1125.28, -9441.01).unwrap() - 0.880809).abs() < 1e-6);
        assert!(pseudo_r2(-1e-12, -10.0).unwrap() > 0.999_999);
        assert!(pseudo_r2(-1.0, 0.0).is_err());
        assert!(pseudo_r2(-1.0, 2.0).is_err());
    }

    #[test]
    fn interval_is_symmetric() {
        let w = WaldInterval::new(3, 1.0, 0.5);
        assert!((w.upper - w.estimate - Z_95 * 0.5).abs() < 1e-15);
        assert!((w.estimate - w.lower - Z_95 * 0.5).abs() < 1e-15);
    }
}
