use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::objective::mean_log_pseudo_likelihood;
use crate::estimator::{fit_path, GridSpec, SolverOptions, StackedDesign};

/// Assignment of observations (not stacked rows) to folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub folds: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub const DEFAULT_FOLDS: usize = 10;

    /// Random balanced assignment: a seeded shuffle dealt round-robin.
    pub fn new(n: usize, folds: usize, seed: u64) -> Result<Self> {
        if folds < 2 || folds > n {
            return Err(Error::InvalidInput(format!("cannot split {n} observations into {folds} folds")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut assignment = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            assignment[i] = pos % folds;
        }
        Ok(Self { n, folds, assignment, seed })
    }

    pub fn from_assignment(assignment: Vec<usize>, seed: u64) -> Result<Self> {
        let folds = assignment.iter().max().map_or(0, |m| m + 1);
        if folds < 2 {
            return Err(Error::InvalidInput("fold assignment needs at least two folds".into()));
        }
        let plan = Self {
            n: assignment.len(),
            folds,
            assignment,
            seed,
        };
        if plan.sizes().contains(&0) {
            return Err(Error::InvalidInput("fold assignment leaves a fold empty".into()));
        }
        Ok(plan)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Held-out scores along a shared `λ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCurve {
    /// Descending.
    pub lambdas: Vec<f64>,
    /// Mean held-out log pseudo-likelihood over the folds that were used.
    pub mean: Vec<f64>,
    /// Standard error of `mean` across those folds.
    pub se: Vec<f64>,
    /// `fold_scores[f][l]`; `None` for flagged folds.
    pub fold_scores: Vec<Option<Vec<f64>>>,
    pub flagged_folds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvChoice {
    pub lambda: f64,
    pub index: usize,
    pub one_se: bool,
    pub curve: CvCurve,
    pub warnings: Vec<String>,
}

/// Index of the best score; exact ties go to the earliest (largest) `λ`.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Grouped K-fold cross-validation of the penalized path on a fixed grid.
///
/// `weights` must come from the full data. A fold whose training part has a
/// response block that is constant there but not on the full data is flagged
/// and left out of the average.
pub fn cross_validate(design: &StackedDesign, weights: &[Option<f64>], plan: &FoldPlan, lambdas: &[f64], options: &SolverOptions, one_se: bool) -> Result<CvChoice> {
    if plan.n != design.n_obs() {
        return Err(Error::Dimension(format!("fold plan covers {} observations, data has {}", plan.n, design.n_obs())));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let full_constant = design.constant_blocks();

    let fold_results: Vec<Result<Option<Vec<f64>>>> = (0..plan.folds)
        .into_par_iter()
        .map(|f| {
            let train = design.subset_observations(&plan.train_indices(f));
            if train.constant_blocks().iter().any(|b| !full_constant.contains(b)) {
                return Ok(None);
            }
            let test = design.subset_observations(&plan.test_indices(f));
            let path = fit_path(&train, weights, Some(&lambdas), GridSpec::default(), options)?;
            Ok(Some(path.points.iter().map(|pt| mean_log_pseudo_likelihood(&test, &pt.fit.params)).collect()))
        })
        .collect();
    let fold_scores = fold_results.into_iter().collect::<Result<Vec<_>>>()?;

    let flagged_folds: Vec<usize> = (0..plan.folds).filter(|&f| fold_scores[f].is_none()).collect();
    let used: Vec<&Vec<f64>> = fold_scores.iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::InvalidInput("every cross-validation fold has a constant response column in training".into()));
    }
    let m = used.len() as f64;
    let mean: Vec<f64> = (0..lambdas.len()).map(|l| used.iter().map(|s| s[l]).sum::<f64>() / m).collect();
    let se: Vec<f64> = (0..lambdas.len())
        .map(|l| {
            if used.len() < 2 {
                return 0.0;
            }
            let ss: f64 = used.iter().map(|s| (s[l] - mean[l]).powi(2)).sum();
            (ss / (m - 1.0) / m).sqrt()
        })
        .collect();

    let mut index = argmax_first(&mean);
    if one_se {
        let bar = mean[index] - se[index];
        index = mean.iter().position(|&v| v >= bar).unwrap_or(index);
    }
    let mut warnings = Vec::new();
    if !flagged_folds.is_empty() {
        warnings.push(format!("folds {flagged_folds:?} have a constant response column in training and were left out"));
    }
    Ok(CvChoice {
        lambda: lambdas[index],
        index,
        one_se,
        curve: CvCurve {
            lambdas,
            mean,
            se,
            fold_scores,
            flagged_folds,
        },
        warnings,
    })
}
