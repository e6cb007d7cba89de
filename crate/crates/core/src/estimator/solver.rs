//! Proximal Newton solver with cyclic coordinate descent.
//!
//! Each outer iteration forms the quadratic expansion of the loss at the
//! current iterate, profiles out the (unpenalized, block-diagonal) main
//! effects exactly, and minimizes the resulting penalized quadratic in `α`
//! by cyclic coordinate descent with soft-thresholding. The step is accepted
//! through a backtracking line search on the true objective, so the
//! objective never increases between outer iterations. With `λ = 0` the
//! quadratic is solved directly and the iteration is damped Newton.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design::StackedDesign;
use super::objective::{gradient_from_eta, linear_predictor, loss_from_eta, Gradient};
use super::PenaltySpec;
use crate::error::{Error, Result};
use crate::model::ParameterSet;
use crate::numeric::{dot, logistic, soft_threshold};

/// Coefficients whose magnitude exceeds this are reported as diverging.
const DIVERGENCE_BOUND: f64 = 1e3;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Outer (Newton) iterations.
    pub max_iter: usize,
    /// Coordinate-descent cycles per inner solve.
    pub max_cycles: usize,
    pub kkt_tol: f64,
    pub fit_main_effects: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            max_cycles: 10_000,
            kkt_tol: 1e-6,
            fit_main_effects: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitWarning {
    ConstantResponse { block: usize },
    Divergence { coefficient: String, value: f64, gradient: f64 },
    NotConverged { iterations: usize, kkt_residual: f64 },
}

/// Solution of one penalized (or unpenalized) fit with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub params: ParameterSet,
    pub lambda: f64,
    pub objective: f64,
    pub loss: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<FitWarning>,
    /// Penalized objective after each outer iteration, starting at the initial point.
    pub objective_trace: Vec<f64>,
}

impl FitOutcome {
    pub fn active_set(&self) -> Vec<usize> {
        self.params.active_set()
    }

    pub fn has_divergence(&self) -> bool {
        self.warnings.iter().any(|w| matches!(w, FitWarning::Divergence { .. }))
    }
}

/// KKT residual of the penalized problem (gradient of the loss, not of the
/// log pseudo-likelihood; the sign convention does not affect the residual).
pub fn kkt_residual(grad: &Gradient, params: &ParameterSet, penalty: &PenaltySpec, fit_main_effects: bool) -> f64 {
    let mut r: f64 = 0.0;
    if fit_main_effects {
        r = grad.main_effects.iter().fold(r, |m, g| m.max(g.abs()));
    }
    for (k, (&g, &a)) in grad.alpha.iter().zip(&params.alpha).enumerate() {
        if penalty.is_excluded(k) {
            continue;
        }
        let t = penalty.threshold(k);
        let v = if a != 0.0 { (g + t * a.signum()).abs() } else { (g.abs() - t).max(0.0) };
        r = r.max(v);
    }
    r
}

/// Minimizes the penalized objective, optionally starting from `warm_start`.
pub fn fit_penalized(design: &StackedDesign, penalty: &PenaltySpec, warm_start: Option<&ParameterSet>, options: &SolverOptions) -> Result<FitOutcome> {
    penalty.validate()?;
    let k = design.k();
    let nb = design.n_blocks();
    if penalty.weights.len() != k {
        return Err(Error::Dimension(format!("{} penalty weights for {k} columns", penalty.weights.len())));
    }
    let mut params = match warm_start {
        Some(w) => {
            if w.k() != k || w.p() != nb {
                return Err(Error::Dimension("warm start does not match the design".into()));
            }
            w.clone()
        }
        None => {
            let mut start = ParameterSet::zeros(nb, k);
            if options.fit_main_effects {
                start.main_effects = intercept_start(design);
            }
            start
        }
    };
    if !options.fit_main_effects {
        params.main_effects.iter_mut().for_each(|t| *t = 0.0);
    }
    for (a, w) in params.alpha.iter_mut().zip(&penalty.weights) {
        if w.is_none() {
            *a = 0.0;
        }
    }

    let mut warnings = Vec::new();
    if options.fit_main_effects {
        warnings.extend(design.constant_blocks().into_iter().map(|block| FitWarning::ConstantResponse { block }));
    }

    let mut eta = linear_predictor(design, &params);
    let mut objective = loss_from_eta(design, &eta) + penalty.value(&params.alpha);
    let mut trace = vec![objective];
    let mut iterations = 0;
    let mut grad = gradient_from_eta(design, &eta);
    let mut kkt = kkt_residual(&grad, &params, penalty, options.fit_main_effects);

    while iterations < options.max_iter {
        if kkt <= options.kkt_tol {
            break;
        }
        let Some(step) = newton_direction(design, &params, &eta, &grad, penalty, options) else {
            break;
        };
        let Some((t, new_objective)) = line_search(design, &params, &eta, &step, penalty, objective) else {
            break;
        };
        iterations += 1;
        for (p, d) in params.main_effects.iter_mut().zip(&step.main_effects) {
            *p += t * d;
        }
        for &(idx, d) in &step.alpha {
            let v = params.alpha[idx] + t * d;
            // Coordinate descent lands exactly on zero; keep it exact under damping.
            params.alpha[idx] = if step.target_zero.contains(&idx) && t == 1.0 { 0.0 } else { v };
        }
        for (e, d) in eta.iter_mut().zip(&step.delta_eta) {
            *e += t * d;
        }
        let recomputed = if t != 1.0 || !step.target_zero.is_empty() {
            // Re-derive η to avoid drift after exact zeroing or damping.
            eta = linear_predictor(design, &params);
            loss_from_eta(design, &eta) + penalty.value(&params.alpha)
        } else {
            new_objective
        };
        debug_assert!(recomputed <= objective + 1e-12 * objective.abs().max(1.0), "objective increased: {objective} -> {recomputed} ({new_objective})");
        objective = recomputed;
        trace.push(objective);
        grad = gradient_from_eta(design, &eta);
        kkt = kkt_residual(&grad, &params, penalty, options.fit_main_effects);
    }

    let converged = kkt <= options.kkt_tol;
    if !converged {
        warnings.push(FitWarning::NotConverged { iterations, kkt_residual: kkt });
    }
    let labels = design.column_labels();
    for (b, &t) in params.main_effects.iter().enumerate() {
        if t.abs() > DIVERGENCE_BOUND {
            warnings.push(FitWarning::Divergence {
                coefficient: format!("main_effect[{b}]"),
                value: t,
                gradient: grad.main_effects[b],
            });
        }
    }
    for (c, &a) in params.alpha.iter().enumerate() {
        if a.abs() > DIVERGENCE_BOUND {
            warnings.push(FitWarning::Divergence {
                coefficient: labels[c].clone(),
                value: a,
                gradient: grad.alpha[c],
            });
        }
    }
    let loss = loss_from_eta(design, &eta);
    Ok(FitOutcome {
        params,
        lambda: penalty.lambda,
        objective,
        loss,
        kkt_residual: kkt,
        iterations,
        converged,
        warnings,
        objective_trace: trace,
    })
}

/// Unregularized pseudo-likelihood estimator (`λ = 0`), with a gradient
/// tolerance of 1e-8. Without main effects this is the no-main-effect
/// criterion.
pub fn fit_unregularized(design: &StackedDesign, include_main_effects: bool) -> Result<FitOutcome> {
    let options = SolverOptions {
        kkt_tol: 1e-8,
        fit_main_effects: include_main_effects,
        ..SolverOptions::default()
    };
    fit_penalized(design, &PenaltySpec::unpenalized(design.k()), None, &options)
}

/// Unregularized fit restricted to the columns in `support`; other
/// coefficients are fixed at zero.
pub fn fit_oracle(design: &StackedDesign, support: &[usize], options: &SolverOptions) -> Result<FitOutcome> {
    let k = design.k();
    if let Some(&bad) = support.iter().find(|&&s| s >= k) {
        return Err(Error::InvalidInput(format!("support index {bad} out of range for K = {k}")));
    }
    let weights = (0..k).map(|c| support.contains(&c).then_some(1.0)).collect();
    let options = SolverOptions {
        kkt_tol: options.kkt_tol.min(1e-8),
        ..options.clone()
    };
    fit_penalized(design, &PenaltySpec { lambda: 0.0, weights }, None, &options)
}

/// Starting main effects `logit(ȳ_b)`, clamped for constant blocks.
fn intercept_start(design: &StackedDesign) -> Vec<f64> {
    (0..design.n_blocks())
        .map(|b| {
            let r = &design.response()[design.block(b)];
            let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
            let m = mean.clamp(1e-4, 1.0 - 1e-4);
            (m / (1.0 - m)).ln()
        })
        .collect()
}

struct Step {
    main_effects: Vec<f64>,
    /// `(column, δα)` over the working set.
    alpha: Vec<(usize, f64)>,
    /// Columns whose coordinate-descent target is exactly zero.
    target_zero: Vec<usize>,
    delta_eta: Vec<f64>,
    /// Predicted change `gᵀd + λ(‖w(α+d)‖₁ − ‖wα‖₁)`.
    decrement: f64,
}

fn newton_direction(design: &StackedDesign, params: &ParameterSet, eta: &[f64], grad: &Gradient, penalty: &PenaltySpec, options: &SolverOptions) -> Option<Step> {
    let rows = design.rows();
    let scale = 1.0 / rows as f64;
    let nb = design.n_blocks();
    let fit_main = options.fit_main_effects;

    let working: Vec<usize> = (0..design.k())
        .filter(|&c| !penalty.is_excluded(c))
        .filter(|&c| params.alpha[c] != 0.0 || grad.alpha[c].abs() > penalty.threshold(c) * (1.0 + 1e-12))
        .collect();
    if working.is_empty() && !fit_main {
        return None;
    }

    let v: Vec<f64> = eta
        .iter()
        .map(|&e| {
            let m = logistic(e);
            m * (1.0 - m) * scale
        })
        .collect();
    let w = working.len();
    let sv: Vec<f64> = v.iter().map(|x| x.sqrt()).collect();
    // E = Xᵀ V X over the working set, as a single matrix product.
    let mut buf = Vec::with_capacity(rows * w);
    for &c in &working {
        buf.extend(design.column(c).iter().zip(&sv).map(|(x, s)| x * s));
    }
    let root = DMatrix::from_vec(rows, w, buf);
    let e = root.transpose() * &root;
    let root = root.as_slice();
    let mut d = vec![0.0; nb];
    let mut c = DMatrix::<f64>::zeros(nb, w);
    if fit_main {
        for bl in 0..nb {
            let range = design.block(bl);
            d[bl] = v[range.clone()].iter().sum::<f64>().max(1e-12 * scale);
            for a in 0..w {
                let col = &root[a * rows..(a + 1) * rows];
                c[(bl, a)] = dot(&col[range.clone()], &sv[range.clone()]);
            }
        }
    }

    // Reduced problem in α after profiling the main effects.
    let mut s = e;
    let mut g_red = DVector::from_iterator(w, working.iter().map(|&col| grad.alpha[col]));
    if fit_main {
        for a in 0..w {
            for bl in 0..nb {
                g_red[a] -= c[(bl, a)] * grad.main_effects[bl] / d[bl];
            }
            for b in a..w {
                let mut sub = 0.0;
                for bl in 0..nb {
                    sub += c[(bl, a)] * c[(bl, b)] / d[bl];
                }
                s[(a, b)] -= sub;
                if a != b {
                    s[(b, a)] -= sub;
                }
            }
        }
    }

    let current: Vec<f64> = working.iter().map(|&col| params.alpha[col]).collect();
    let thresholds: Vec<f64> = working.iter().map(|&col| penalty.threshold(col)).collect();
    let unpenalized = thresholds.iter().all(|&t| t == 0.0);
    let delta_alpha = if unpenalized {
        solve_direct(&s, &g_red).unwrap_or_else(|| coordinate_descent(&s, &g_red, &current, &thresholds, options.max_cycles))
    } else {
        coordinate_descent(&s, &g_red, &current, &thresholds, options.max_cycles)
    };

    let mut delta_main = vec![0.0; nb];
    if fit_main {
        for bl in 0..nb {
            let coupling: f64 = (0..w).map(|a| c[(bl, a)] * delta_alpha[a]).sum();
            delta_main[bl] = -(grad.main_effects[bl] + coupling) / d[bl];
        }
    }

    let mut delta_eta = vec![0.0; rows];
    for (bl, &dm) in delta_main.iter().enumerate() {
        if dm != 0.0 {
            delta_eta[design.block(bl)].iter_mut().for_each(|x| *x = dm);
        }
    }
    for (a, &col) in working.iter().enumerate() {
        let da = delta_alpha[a];
        if da != 0.0 {
            for (x, z) in delta_eta.iter_mut().zip(design.column(col)) {
                *x += da * z;
            }
        }
    }

    let mut decrement: f64 = grad.main_effects.iter().zip(&delta_main).map(|(g, d)| g * d).sum();
    let mut target_zero = Vec::new();
    for (a, &col) in working.iter().enumerate() {
        let new = current[a] + delta_alpha[a];
        decrement += grad.alpha[col] * delta_alpha[a] + thresholds[a] * (new.abs() - current[a].abs());
        if new == 0.0 && current[a] != 0.0 {
            target_zero.push(col);
        }
    }
    Some(Step {
        main_effects: delta_main,
        alpha: working.iter().copied().zip(delta_alpha.iter().copied()).collect(),
        target_zero,
        delta_eta,
        decrement,
    })
}

fn solve_direct(s: &DMatrix<f64>, g: &DVector<f64>) -> Option<Vec<f64>> {
    if s.nrows() == 0 {
        return Some(Vec::new());
    }
    let chol = s.clone().cholesky()?;
    let x = chol.solve(&(-g));
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}

/// Cyclic coordinate descent on
/// `gᵀ(a − a₀) + ½ (a − a₀)ᵀ S (a − a₀) + Σ t_k |a_k|`; returns `a − a₀`.
fn coordinate_descent(s: &DMatrix<f64>, g: &DVector<f64>, start: &[f64], thresholds: &[f64], max_cycles: usize) -> Vec<f64> {
    let w = start.len();
    let mut a = start.to_vec();
    let mut q_grad: Vec<f64> = g.iter().copied().collect();
    for _ in 0..max_cycles {
        let mut max_change: f64 = 0.0;
        for k in 0..w {
            let skk = s[(k, k)];
            if skk <= 1e-14 {
                continue;
            }
            let z = skk * a[k] - q_grad[k];
            let new = soft_threshold(z, thresholds[k]) / skk;
            let delta = new - a[k];
            if delta != 0.0 {
                a[k] = new;
                for (r, qg) in q_grad.iter_mut().enumerate() {
                    *qg += s[(r, k)] * delta;
                }
                max_change = max_change.max(skk * delta.abs());
            }
        }
        if max_change < 1e-13 {
            break;
        }
    }
    a.iter().zip(start).map(|(x, x0)| x - x0).collect()
}

fn line_search(design: &StackedDesign, params: &ParameterSet, eta: &[f64], step: &Step, penalty: &PenaltySpec, objective: f64) -> Option<(f64, f64)> {
    if !(step.decrement < 0.0) {
        return None;
    }
    let mut t = 1.0;
    let mut trial_eta = vec![0.0; eta.len()];
    let mut trial_alpha = params.alpha.clone();
    for _ in 0..MAX_BACKTRACKS {
        for ((te, e), d) in trial_eta.iter_mut().zip(eta).zip(&step.delta_eta) {
            *te = e + t * d;
        }
        for &(idx, d) in &step.alpha {
            trial_alpha[idx] = params.alpha[idx] + t * d;
        }
        let value = loss_from_eta(design, &trial_eta) + penalty.value(&trial_alpha);
        if value <= objective + ARMIJO * t * step.decrement {
            return Some((t, value));
        }
        t *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::design::build_design;
    use crate::estimator::objective::{gradient, loss};
    use crate::model::{BinaryDataset, SimilarityKind, SimilarityMatrix};
    use nalgebra::DMatrix;

    fn toy() -> (BinaryDataset, Vec<SimilarityMatrix>) {
        let rows: Vec<Vec<u8>> = (0..40u32)
            .map(|i| {
                let h = i.wrapping_mul(2_654_435_761) >> 7;
                (0..4).map(|j| ((h >> (3 * j)) & 1) as u8 | u8::from(i % 5 == 0)).collect()
            })
            .collect();
        let data = BinaryDataset::from_rows(&rows).unwrap();
        let w1 = DMatrix::from_fn(4, 4, |a, b| if a != b && (a + b) % 2 == 1 { 1.0 } else { 0.0 });
        let w2 = DMatrix::from_fn(4, 4, |a, b| if a == b { 0.0 } else { 1.0 / (1.0 + (a as f64 - b as f64).abs()) });
        let sims = vec![
            SimilarityMatrix::new("w1", SimilarityKind::Raw, w1).unwrap(),
            SimilarityMatrix::new("w2", SimilarityKind::Raw, w2).unwrap(),
        ];
        (data, sims)
    }

    #[test]
    fn unregularized_reaches_stationarity() {
        let (data, sims) = toy();
        let design = build_design(&data, &sims).unwrap();
        let fit = fit_unregularized(&design, true).unwrap();
        assert!(fit.converged);
        assert!(gradient(&design, &fit.params).max_abs() <= 1e-8);
        let trace = &fit.objective_trace;
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn lambda_zero_matches_unregularized() {
        let (data, sims) = toy();
        let design = build_design(&data, &sims).unwrap();
        let unreg = fit_unregularized(&design, true).unwrap();
        let opts = SolverOptions {
            kkt_tol: 1e-10,
            ..SolverOptions::default()
        };
        let pen = fit_penalized(&design, &PenaltySpec::new(0.0, vec![Some(0.3), Some(2.0)]).unwrap(), None, &opts).unwrap();
        for (a, b) in unreg.params.alpha.iter().zip(&pen.params.alpha) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn strong_penalty_zeroes_alpha_and_monotone_trace() {
        let (data, sims) = toy();
        let design = build_design(&data, &sims).unwrap();
        let fit = fit_penalized(&design, &PenaltySpec::new(10.0, vec![Some(1.0), Some(1.0)]).unwrap(), None, &SolverOptions::default()).unwrap();
        assert_eq!(fit.params.alpha, vec![0.0, 0.0]);
        assert!(fit.converged);
        let mid = fit_penalized(&design, &PenaltySpec::new(0.01, vec![Some(1.0), Some(1.0)]).unwrap(), None, &SolverOptions::default()).unwrap();
        assert!(mid.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(mid.kkt_residual <= 1e-6);
    }

    #[test]
    fn excluded_coefficients_stay_zero() {
        let (data, sims) = toy();
        let design = build_design(&data, &sims).unwrap();
        let fit = fit_oracle(&design, &[1], &SolverOptions::default()).unwrap();
        assert_eq!(fit.params.alpha[0], 0.0);
        assert!(fit.params.alpha[1] != 0.0);
        let none = fit_oracle(&design, &[], &SolverOptions::default()).unwrap();
        assert_eq!(none.params.alpha, vec![0.0, 0.0]);
        assert!(fit_oracle(&design, &[2], &SolverOptions::default()).is_err());
    }

    #[test]
    fn no_main_effect_variant_keeps_intercepts_at_zero() {
        let (data, sims) = toy();
        let design = build_design(&data, &sims).unwrap();
        let fit = fit_unregularized(&design, false).unwrap();
        assert!(fit.params.main_effects.iter().all(|&t| t == 0.0));
        assert!(gradient(&design, &fit.params).alpha.iter().all(|g| g.abs() < 1e-8));
        assert!(loss(&design, &fit.params) <= loss(&design, &ParameterSet::zeros(4, 2)));
    }

    #[test]
    fn constant_block_is_flagged() {
        let data = BinaryDataset::from_rows(&[vec![1, 0], vec![1, 1], vec![1, 0]]).unwrap();
        let sims = vec![SimilarityMatrix::from_rows("w", SimilarityKind::Raw, &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()];
        let design = build_design(&data, &sims).unwrap();
        let fit = fit_unregularized(&design, true).unwrap();
        assert!(fit.warnings.iter().any(|w| matches!(w, FitWarning::ConstantResponse { block: 0 })));
    }
}
