//! Empirical checks of the eigenvalue and irrepresentability conditions on a
//! fitted model. Diagnostic only; nothing here is enforced.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::design::StackedDesign;
use super::objective::hessian;
use crate::model::ParameterSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityDiagnostics {
    pub support: Vec<usize>,
    /// Smallest eigenvalue of `M̂_SS`, `M̂ = -∇²l(α̂)` over the coefficients.
    pub lambda_min_m_ss: f64,
    /// Largest eigenvalue of `Û = (np)⁻¹ Σ_i X⁽ⁱ⁾ᵀ X⁽ⁱ⁾`.
    pub lambda_max_u: f64,
    /// `‖M̂_{S^c,S} (M̂_{S,S})⁻¹‖_∞`; absent when `M̂_SS` is singular.
    pub incoherence: Option<f64>,
    pub m_ss_singular: bool,
    /// Full `M̂` over the coefficients, row by row.
    pub m_hat: Vec<Vec<f64>>,
}

pub fn check_regularity(design: &StackedDesign, fit: &ParameterSet, support: &[usize]) -> RegularityDiagnostics {
    let k = design.k();
    let m = hessian(design, fit, false);
    let rows = design.rows().max(1) as f64;
    let mut u = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v: f64 = design.column(a).iter().zip(design.column(b)).map(|(x, y)| x * y).sum::<f64>() / rows;
            u[(a, b)] = v;
            u[(b, a)] = v;
        }
    }
    let lambda_max_u = if k == 0 { 0.0 } else { SymmetricEigen::new(u).eigenvalues.max() };

    let s = support.len();
    let m_ss = DMatrix::from_fn(s, s, |a, b| m[(support[a], support[b])]);
    let lambda_min_m_ss = if s == 0 { 0.0 } else { SymmetricEigen::new(m_ss.clone()).eigenvalues.min() };
    let scale = m_ss.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let m_ss_singular = s > 0 && lambda_min_m_ss <= 1e-12 * scale.max(f64::MIN_POSITIVE);

    let complement: Vec<usize> = (0..k).filter(|c| !support.contains(c)).collect();
    let incoherence = if s == 0 {
        Some(0.0)
    } else if m_ss_singular {
        None
    } else {
        m_ss.try_inverse().map(|inv| {
            let cross = DMatrix::from_fn(complement.len(), s, |a, b| m[(complement[a], support[b])]);
            let prod = cross * inv;
            (0..prod.nrows()).map(|r| prod.row(r).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
        })
    };

    RegularityDiagnostics {
        support: support.to_vec(),
        lambda_min_m_ss,
        lambda_max_u,
        incoherence,
        m_ss_singular,
        m_hat: (0..k).map(|a| (0..k).map(|b| m[(a, b)]).collect()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_columns_have_zero_incoherence() {
        // Columns with disjoint row supports.
        let n = 6;
        let col = |lo: usize, hi: usize| (0..n).map(|r| if (lo..hi).contains(&r) { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let design = StackedDesign::from_parts(n, 1, vec![1.0, 0.0, 1.0, 0.0, 1.0, 1.0], vec![col(0, 2), col(2, 4), col(4, 6)], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let params = ParameterSet::new(vec![0.2], vec![0.5, -0.3, 0.1]).unwrap();
        let d = check_regularity(&design, &params, &[0, 1]);
        assert_eq!(d.incoherence, Some(0.0));
        assert!(d.lambda_min_m_ss > 0.0);
        assert!((d.lambda_max_u - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_design_reports_zeros() {
        let design = StackedDesign::from_parts(3, 2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![vec![0.0; 6], vec![0.0; 6]], vec!["a".into(), "b".into()]).unwrap();
        let d = check_regularity(&design, &ParameterSet::zeros(2, 2), &[0]);
        assert_eq!(d.lambda_min_m_ss, 0.0);
        assert_eq!(d.lambda_max_u, 0.0);
        assert!(d.m_ss_singular);
        assert_eq!(d.incoherence, None);
    }
}
