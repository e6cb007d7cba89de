//! Neighborhood-selection baseline: one lasso-penalized logistic regression
//! per response on all other responses, symmetrized by averaging. It ignores
//! similarity information entirely.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{fit_path, lasso_weights, GridSpec, SolverOptions, StackedDesign};
use crate::model::{BinaryDataset, InteractionMatrix};
use crate::selection::{cross_validate, FoldPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodConfig {
    pub folds: usize,
    pub grid: GridSpec,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for NeighborhoodConfig {
    fn default() -> Self {
        Self {
            folds: FoldPlan::DEFAULT_FOLDS,
            grid: GridSpec::default(),
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodFit {
    pub theta: InteractionMatrix,
    /// Cross-validated `λ` per response; `None` for flagged responses.
    pub lambdas: Vec<Option<f64>>,
    /// Responses that are constant and were not regressed.
    pub flagged: Vec<usize>,
}

/// Logistic design of response `j` on the other `p - 1` responses.
pub fn response_design(data: &BinaryDataset, j: usize) -> Result<StackedDesign> {
    let (n, p) = (data.n(), data.p());
    let response = (0..n).map(|i| data.get(i, j) as f64).collect();
    let others: Vec<usize> = (0..p).filter(|&c| c != j).collect();
    let columns = others.iter().map(|&c| (0..n).map(|i| data.get(i, c) as f64).collect()).collect();
    let labels = others.iter().map(|&c| data.labels()[c].clone()).collect();
    StackedDesign::from_parts(n, 1, response, columns, labels)
}

/// Row `j` of the asymmetric estimate: `(intercept, coefficients)`, with the
/// cross-validated `λ`.
pub fn fit_response(design: &StackedDesign, config: &NeighborhoodConfig) -> Result<(f64, Vec<f64>, f64)> {
    let weights = lasso_weights(design.k());
    let path = fit_path(design, &weights, None, config.grid, &config.solver)?;
    let plan = FoldPlan::new(design.n_obs(), config.folds, config.seed)?;
    let choice = cross_validate(design, &weights, &plan, &path.lambdas(), &config.solver, false)?;
    let fit = &path.points[choice.index].fit;
    Ok((fit.params.main_effects[0], fit.params.alpha.clone(), choice.lambda))
}

pub fn neighborhood_lasso(data: &BinaryDataset, config: &NeighborhoodConfig) -> Result<NeighborhoodFit> {
    let (n, p) = (data.n(), data.p());
    if n < 2 {
        return Err(Error::InvalidInput(format!("neighborhood lasso needs at least two observations, got {n}")));
    }
    let constant = data.constant_columns();
    let rows: Vec<Result<Option<(f64, Vec<f64>, f64)>>> = (0..p)
        .into_par_iter()
        .map(|j| {
            if constant.contains(&j) {
                return Ok(None);
            }
            fit_response(&response_design(data, j)?, config).map(Some)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut raw = DMatrix::zeros(p, p);
    for (j, row) in rows.iter().enumerate() {
        if let Some((intercept, coefs, _)) = row {
            raw[(j, j)] = *intercept;
            let others = (0..p).filter(|&c| c != j);
            for (c, v) in others.zip(coefs) {
                raw[(j, c)] = *v;
            }
        }
    }
    let sym = DMatrix::from_fn(p, p, |a, b| if a == b { raw[(a, a)] } else { 0.5 * (raw[(a, b)] + raw[(b, a)]) });
    Ok(NeighborhoodFit {
        theta: InteractionMatrix::from_matrix(sym)?,
        lambdas: rows.iter().map(|r| r.as_ref().map(|(_, _, l)| *l)).collect(),
        flagged: constant,
    })
}
