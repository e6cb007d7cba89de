use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::objective::mean_log_pseudo_likelihood;
use crate::estimator::{PathResult, StackedDesign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    /// Complexity penalty per degree of freedom for `rows` stacked responses.
    pub fn penalty(self, rows: usize) -> f64 {
        match self {
            Criterion::Aic => 2.0,
            Criterion::Bic => (rows as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcCurve {
    pub criterion: Criterion,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub df: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcChoice {
    pub lambda: f64,
    pub index: usize,
    pub curve: IcCurve,
}

/// Evaluates `-2 N ℓ̄ + c · df` along an already fitted path, with `N = np`,
/// `ℓ̄` the mean log pseudo-likelihood and `df = |active| + p`.
pub fn ic_curve(design: &StackedDesign, path: &PathResult, criterion: Criterion) -> IcCurve {
    let rows = design.rows();
    let c = criterion.penalty(rows);
    let mut values = Vec::with_capacity(path.points.len());
    let mut df = Vec::with_capacity(path.points.len());
    for pt in &path.points {
        let d = pt.active_set().len() + design.n_blocks();
        let ll = mean_log_pseudo_likelihood(design, &pt.fit.params);
        values.push(-2.0 * rows as f64 * ll + c * d as f64);
        df.push(d);
    }
    IcCurve {
        criterion,
        lambdas: path.lambdas(),
        values,
        df,
    }
}

/// Minimizer of the criterion; ties go to the larger `λ`.
pub fn select_ic(design: &StackedDesign, path: &PathResult, criterion: Criterion) -> Result<IcChoice> {
    if path.points.is_empty() {
        return Err(Error::InvalidInput("empty regularization path".into()));
    }
    let curve = ic_curve(design, path, criterion);
    let negated: Vec<f64> = curve.values.iter().map(|v| -v).collect();
    let index = super::cv::argmax_first(&negated);
    Ok(IcChoice {
        lambda: curve.lambdas[index],
        index,
        curve,
    })
}
