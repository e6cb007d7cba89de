//! Estimation and selection accuracy measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InteractionMatrix, ParameterSet};

/// True support `S = {k : α⁰_k ≠ 0}` and the generating parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTruth {
    pub params: ParameterSet,
    pub support: Vec<usize>,
}

impl SelectionTruth {
    pub fn from_params(params: ParameterSet) -> Self {
        let support = params.active_set();
        Self { params, support }
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    /// `K_0 = |S|`.
    pub fn k0(&self) -> usize {
        self.support.len()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.k()).filter(|k| !self.support.contains(k)).collect()
    }
}

/// `‖α̂ − α⁰‖²`, the unnormalized numerator of [`mse_alpha`].
pub fn sse_alpha(est: &ParameterSet, truth: &SelectionTruth) -> Result<f64> {
    check(est, truth)?;
    Ok(est.alpha.iter().zip(&truth.params.alpha).map(|(a, b)| (a - b).powi(2)).sum())
}

/// `‖θ̂_diag − θ⁰_diag‖²`.
pub fn sse_theta(est: &ParameterSet, truth: &SelectionTruth) -> Result<f64> {
    check(est, truth)?;
    Ok(est.main_effects.iter().zip(&truth.params.main_effects).map(|(a, b)| (a - b).powi(2)).sum())
}

/// `(1/K) ‖α̂ − α⁰‖²`.
pub fn mse_alpha(est: &ParameterSet, truth: &SelectionTruth) -> Result<f64> {
    Ok(sse_alpha(est, truth)? / truth.k().max(1) as f64)
}

/// `(1/p) ‖θ̂_diag − θ⁰_diag‖²`.
pub fn mse_theta(est: &ParameterSet, truth: &SelectionTruth) -> Result<f64> {
    Ok(sse_theta(est, truth)? / truth.params.p().max(1) as f64)
}

fn check(est: &ParameterSet, truth: &SelectionTruth) -> Result<()> {
    if est.k() != truth.k() || est.p() != truth.params.p() {
        return Err(Error::Dimension(format!(
            "estimate has (p, K) = ({}, {}), truth has ({}, {})",
            est.p(),
            est.k(),
            truth.params.p(),
            truth.k()
        )));
    }
    Ok(())
}

/// `(TPR, FPR)`; the FPR is `None` when every coefficient is truly non-zero.
pub fn tpr_fpr(active: &[usize], truth: &SelectionTruth) -> Result<(f64, Option<f64>)> {
    let k = truth.k();
    if let Some(&bad) = active.iter().find(|&&a| a >= k) {
        return Err(Error::InvalidInput(format!("active index {bad} out of range for K = {k}")));
    }
    let true_pos = active.iter().filter(|a| truth.support.contains(a)).count();
    let false_pos = active.len() - true_pos;
    let k0 = truth.k0();
    let tpr = if k0 == 0 { 0.0 } else { true_pos as f64 / k0 as f64 };
    let fpr = (k > k0).then(|| false_pos as f64 / (k - k0) as f64);
    Ok((tpr, fpr))
}

/// Frobenius norm of the off-diagonal difference of two interaction matrices.
pub fn theta_error(est: &InteractionMatrix, truth: &InteractionMatrix) -> Result<f64> {
    if est.dim() != truth.dim() {
        return Err(Error::Dimension(format!("Θ dimensions {} and {} differ", est.dim(), truth.dim())));
    }
    let p = est.dim();
    let mut total = 0.0;
    for j in 0..p {
        for k in 0..p {
            if j != k {
                total += (est.get(j, k) - truth.get(j, k)).powi(2);
            }
        }
    }
    Ok(total.sqrt())
}
