//! Loss, gradient and Hessian of the scaled negative log pseudo-likelihood
//! `-(1/(np)) Σ_i Σ_j log f_j(y_ij | y_{i\j})` on a stacked design.

use nalgebra::DMatrix;

use super::design::StackedDesign;
use super::PenaltySpec;
use crate::model::ParameterSet;
use crate::numeric::{compensated_sum, dot, log1pexp, logistic};

/// Gradient of the loss, split into main-effect and coefficient parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub main_effects: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Gradient {
    pub fn max_abs(&self) -> f64 {
        self.main_effects.iter().chain(&self.alpha).fold(0.0, |m, g| m.max(g.abs()))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.main_effects.iter().chain(&self.alpha).copied().collect()
    }
}

/// Stacked log-odds `η_r = θ_b(r) + Σ_k α_k x_rk`.
pub fn linear_predictor(design: &StackedDesign, params: &ParameterSet) -> Vec<f64> {
    let mut eta = vec![0.0; design.rows()];
    for (b, &t) in params.main_effects.iter().enumerate() {
        if t != 0.0 {
            eta[design.block(b)].iter_mut().for_each(|e| *e = t);
        }
    }
    for (k, &a) in params.alpha.iter().enumerate() {
        if a != 0.0 {
            for (e, x) in eta.iter_mut().zip(design.column(k)) {
                *e += a * x;
            }
        }
    }
    eta
}

/// Mean negative Bernoulli log-likelihood for given log-odds.
pub fn loss_from_eta(design: &StackedDesign, eta: &[f64]) -> f64 {
    let total = compensated_sum(design.response().iter().zip(eta).map(|(&y, &e)| log1pexp(e) - y * e));
    total / design.rows().max(1) as f64
}

pub fn loss(design: &StackedDesign, params: &ParameterSet) -> f64 {
    loss_from_eta(design, &linear_predictor(design, params))
}

/// Mean log pseudo-likelihood (`-loss`).
pub fn mean_log_pseudo_likelihood(design: &StackedDesign, params: &ParameterSet) -> f64 {
    -loss(design, params)
}

/// Loss plus `λ Σ w_k |α_k|`; excluded coefficients contribute nothing when zero.
pub fn penalized_objective(design: &StackedDesign, params: &ParameterSet, penalty: &PenaltySpec) -> f64 {
    loss(design, params) + penalty.value(&params.alpha)
}

pub fn gradient_from_eta(design: &StackedDesign, eta: &[f64]) -> Gradient {
    let scale = 1.0 / design.rows().max(1) as f64;
    let resid: Vec<f64> = design.response().iter().zip(eta).map(|(&y, &e)| logistic(e) - y).collect();
    let main_effects = (0..design.n_blocks()).map(|b| resid[design.block(b)].iter().sum::<f64>() * scale).collect();
    let alpha = (0..design.k())
        .map(|k| dot(design.column(k), &resid) * scale)
        .collect();
    Gradient { main_effects, alpha }
}

pub fn gradient(design: &StackedDesign, params: &ParameterSet) -> Gradient {
    gradient_from_eta(design, &linear_predictor(design, params))
}

/// Hessian of the loss in the order `(θ_11..θ_pp, α_1..α_K)`; the main-effect
/// block is omitted when `include_main_effects` is false.
pub fn hessian(design: &StackedDesign, params: &ParameterSet, include_main_effects: bool) -> DMatrix<f64> {
    let eta = linear_predictor(design, params);
    let scale = 1.0 / design.rows().max(1) as f64;
    let v: Vec<f64> = eta
        .iter()
        .map(|&e| {
            let m = logistic(e);
            m * (1.0 - m) * scale
        })
        .collect();
    let offset = if include_main_effects { design.n_blocks() } else { 0 };
    let k = design.k();
    let mut h = DMatrix::zeros(offset + k, offset + k);
    if include_main_effects {
        for b in 0..design.n_blocks() {
            let range = design.block(b);
            h[(b, b)] = v[range.clone()].iter().sum();
            for a in 0..k {
                let c: f64 = design.column(a)[range.clone()].iter().zip(&v[range.clone()]).map(|(x, w)| x * w).sum();
                h[(b, offset + a)] = c;
                h[(offset + a, b)] = c;
            }
        }
    }
    for a in 0..k {
        let xa = design.column(a);
        for c in a..k {
            let xc = design.column(c);
            let e: f64 = xa.iter().zip(xc).zip(&v).map(|((p, q), w)| p * q * w).sum();
            h[(offset + a, offset + c)] = e;
            h[(offset + c, offset + a)] = e;
        }
    }
    h
}
