//! Construction of similarity matrices from response-level attributes.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SimilarityKind, SimilarityMatrix};

/// Values of one response-level attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValues {
    Quantitative(Vec<f64>),
    Qualitative(Vec<String>),
    /// Directed or undirected edges over response indices `0..p`.
    Adjacency { p: usize, edges: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeColumn {
    pub name: String,
    pub values: AttributeValues,
}

impl AttributeColumn {
    pub fn quantitative(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values: AttributeValues::Quantitative(values),
        }
    }

    pub fn qualitative<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            values: AttributeValues::Qualitative(values.into_iter().map(Into::into).collect()),
        }
    }

    pub fn adjacency(name: impl Into<String>, p: usize, edges: Vec<(usize, usize)>) -> Self {
        Self {
            name: name.into(),
            values: AttributeValues::Adjacency { p, edges },
        }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            AttributeValues::Quantitative(v) => v.len(),
            AttributeValues::Qualitative(v) => v.len(),
            AttributeValues::Adjacency { p, .. } => *p,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Kernel settings for quantitative attributes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantitativeOptions {
    pub bandwidth: f64,
    /// Z-score the attribute before applying the kernel.
    pub standardize: bool,
}

impl Default for QuantitativeOptions {
    fn default() -> Self {
        Self {
            bandwidth: 1.0,
            standardize: false,
        }
    }
}

/// `w_jj' = exp(-(z_j - z_j')²)` with unit bandwidth.
pub fn from_quantitative(col: &AttributeColumn) -> Result<SimilarityMatrix> {
    from_quantitative_with(col, QuantitativeOptions::default())
}

pub fn from_quantitative_with(col: &AttributeColumn, options: QuantitativeOptions) -> Result<SimilarityMatrix> {
    let AttributeValues::Quantitative(z) = &col.values else {
        return Err(wrong_kind(col, "quantitative"));
    };
    if let Some(row) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::Attribute {
            column: col.name.clone(),
            row,
            reason: format!("non-finite value {}", z[row]),
        });
    }
    if !(options.bandwidth.is_finite() && options.bandwidth > 0.0) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {}", options.bandwidth)));
    }
    let z = if options.standardize { standardized(z) } else { z.clone() };
    let p = z.len();
    let h2 = options.bandwidth * options.bandwidth;
    let values = DMatrix::from_fn(p, p, |j, k| {
        if j == k {
            0.0
        } else {
            let d = z[j] - z[k];
            (-(d * d) / h2).exp()
        }
    });
    SimilarityMatrix::new(col.name.clone(), SimilarityKind::QuantitativeDerived, values)
}

fn standardized(z: &[f64]) -> Vec<f64> {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = var.sqrt();
    if sd > 0.0 {
        z.iter().map(|v| (v - mean) / sd).collect()
    } else {
        vec![0.0; z.len()]
    }
}

/// `w_jj' = 1` when responses `j` and `j'` share a category level.
pub fn from_qualitative(col: &AttributeColumn) -> Result<SimilarityMatrix> {
    let levels = qualitative_levels(col)?;
    let p = levels.len();
    let values = DMatrix::from_fn(p, p, |j, k| if j != k && levels[j] == levels[k] { 1.0 } else { 0.0 });
    SimilarityMatrix::new(col.name.clone(), SimilarityKind::QualitativeDerived, values)
}

/// Indicator that both responses take the given level (one matrix per level
/// of a multi-category attribute, e.g. occupations).
pub fn from_qualitative_level(col: &AttributeColumn, level: &str) -> Result<SimilarityMatrix> {
    let levels = qualitative_levels(col)?;
    let p = levels.len();
    let values = DMatrix::from_fn(p, p, |j, k| {
        if j != k && levels[j] == level && levels[k] == level {
            1.0
        } else {
            0.0
        }
    });
    SimilarityMatrix::new(format!("{}={level}", col.name), SimilarityKind::QualitativeDerived, values)
}

/// Distinct levels of a qualitative column in order of first appearance.
pub fn distinct_levels(col: &AttributeColumn) -> Result<Vec<String>> {
    let levels = qualitative_levels(col)?;
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for l in levels {
        if seen.insert(l.clone(), ()).is_none() {
            out.push(l.clone());
        }
    }
    Ok(out)
}

fn qualitative_levels(col: &AttributeColumn) -> Result<&Vec<String>> {
    let AttributeValues::Qualitative(levels) = &col.values else {
        return Err(wrong_kind(col, "qualitative"));
    };
    if let Some(row) = levels.iter().position(|l| l.trim().is_empty()) {
        return Err(Error::Attribute {
            column: col.name.clone(),
            row,
            reason: "missing category".into(),
        });
    }
    Ok(levels)
}

/// Symmetrized 0/1 adjacency: `w_jj' = 1` if either direction is present.
pub fn from_adjacency(col: &AttributeColumn) -> Result<SimilarityMatrix> {
    let AttributeValues::Adjacency { p, edges } = &col.values else {
        return Err(wrong_kind(col, "adjacency"));
    };
    let p = *p;
    let mut values = DMatrix::zeros(p, p);
    for (row, &(a, b)) in edges.iter().enumerate() {
        if a >= p || b >= p {
            return Err(Error::Attribute {
                column: col.name.clone(),
                row,
                reason: format!("edge ({a}, {b}) references an index outside 0..{p}"),
            });
        }
        if a == b {
            return Err(Error::Attribute {
                column: col.name.clone(),
                row,
                reason: format!("self-loop at index {a}"),
            });
        }
        values[(a, b)] = 1.0;
        values[(b, a)] = 1.0;
    }
    SimilarityMatrix::new(col.name.clone(), SimilarityKind::Adjacency, values)
}

/// Dispatches on the column kind with default quantitative options.
pub fn build(col: &AttributeColumn) -> Result<SimilarityMatrix> {
    match col.values {
        AttributeValues::Quantitative(_) => from_quantitative(col),
        AttributeValues::Qualitative(_) => from_qualitative(col),
        AttributeValues::Adjacency { .. } => from_adjacency(col),
    }
}

fn wrong_kind(col: &AttributeColumn, expected: &str) -> Error {
    Error::InvalidInput(format!("attribute {} is not {expected}", col.name))
}

/// Structural report on a candidate similarity matrix. Never mutates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDiagnostics {
    pub dim: usize,
    pub symmetry_residual: f64,
    pub max_abs_diagonal: f64,
    /// Matrix 1-norm, the maximum absolute column sum.
    pub one_norm: f64,
    pub min_entry: f64,
    pub max_entry: f64,
    pub all_finite: bool,
}

impl SimilarityDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.all_finite && self.symmetry_residual == 0.0 && self.max_abs_diagonal == 0.0
    }
}

pub fn validate(values: &DMatrix<f64>) -> SimilarityDiagnostics {
    let p = values.nrows().min(values.ncols());
    let mut symmetry_residual: f64 = 0.0;
    let mut max_abs_diagonal: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    let mut max_entry = f64::NEG_INFINITY;
    let mut all_finite = true;
    for j in 0..values.nrows() {
        for k in 0..values.ncols() {
            let v = values[(j, k)];
            if !v.is_finite() {
                all_finite = false;
                continue;
            }
            min_entry = min_entry.min(v);
            max_entry = max_entry.max(v);
            if j < p && k < p {
                let r = (v - values[(k, j)]).abs();
                if r.is_finite() {
                    symmetry_residual = symmetry_residual.max(r);
                }
            }
        }
    }
    for j in 0..p {
        let d = values[(j, j)].abs();
        if d.is_finite() {
            max_abs_diagonal = max_abs_diagonal.max(d);
        }
    }
    let one_norm = (0..values.ncols())
        .map(|k| values.column(k).iter().filter(|v| v.is_finite()).map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    SimilarityDiagnostics {
        dim: values.nrows(),
        symmetry_residual,
        max_abs_diagonal,
        one_norm,
        min_entry: if min_entry.is_finite() { min_entry } else { 0.0 },
        max_entry: if max_entry.is_finite() { max_entry } else { 0.0 },
        all_finite,
    }
}

impl SimilarityMatrix {
    pub fn diagnostics(&self) -> SimilarityDiagnostics {
        validate(self.values())
    }
}
