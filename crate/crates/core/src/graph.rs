//! Weighted conditional-dependence graph export in Graphviz DOT.
//!
//! Edges with `θ̂_jj' > threshold` are kept, weighted by `θ̂_jj'`. The
//! threshold only affects presentation.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InteractionMatrix;
use crate::numeric::median;

/// Fill colors assigned to node categories in order of first appearance.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy", content = "value")]
pub enum ThresholdPolicy {
    /// Median of the off-diagonal `θ̂_jj'`, `j < j'`.
    Median,
    /// Keep every pair.
    None,
    Value(f64),
}

impl std::str::FromStr for ThresholdPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "median" => Ok(Self::Median),
            "none" => Ok(Self::None),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .map(Self::Value)
                .ok_or_else(|| format!("expected median, none or a number, got {s:?}")),
        }
    }
}

impl ThresholdPolicy {
    pub fn resolve(self, theta: &InteractionMatrix) -> f64 {
        match self {
            Self::Median => median(&upper_triangle(theta)).unwrap_or(f64::NEG_INFINITY),
            Self::None => f64::NEG_INFINITY,
            Self::Value(v) => v,
        }
    }
}

fn upper_triangle(theta: &InteractionMatrix) -> Vec<f64> {
    let p = theta.dim();
    (0..p).flat_map(|j| (j + 1..p).map(move |k| (j, k))).map(|(j, k)| theta.get(j, k)).collect()
}

/// Pairs `(j, j', θ̂_jj')`, `j < j'`, strictly above `threshold`.
pub fn edges_above(theta: &InteractionMatrix, threshold: f64) -> Vec<(usize, usize, f64)> {
    let p = theta.dim();
    let mut out = Vec::new();
    for j in 0..p {
        for k in j + 1..p {
            let w = theta.get(j, k);
            if w > threshold {
                out.push((j, k, w));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphExport {
    pub threshold: f64,
    pub edges: Vec<(usize, usize, f64)>,
    pub dot: String,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the thresholded graph. `categories`, when given, holds one
/// category per node and drives the fill color.
pub fn export_dot(theta: &InteractionMatrix, labels: &[String], categories: Option<&[String]>, policy: ThresholdPolicy) -> Result<GraphExport> {
    let p = theta.dim();
    if labels.len() != p {
        return Err(Error::Dimension(format!("{} labels for a {p}-node graph", labels.len())));
    }
    if let Some(c) = categories {
        if c.len() != p {
            return Err(Error::Dimension(format!("{} categories for a {p}-node graph", c.len())));
        }
    }
    let threshold = policy.resolve(theta);
    let edges = edges_above(theta, threshold);

    let mut key: Vec<&str> = Vec::new();
    if let Some(c) = categories {
        for cat in c {
            if !key.contains(&cat.as_str()) {
                key.push(cat);
            }
        }
    }
    let color = |cat: &str| PALETTE[key.iter().position(|k| *k == cat).unwrap_or(0) % PALETTE.len()];

    let mut dot = String::new();
    let policy_name = match policy {
        ThresholdPolicy::Median => "median",
        ThresholdPolicy::None => "none",
        ThresholdPolicy::Value(_) => "value",
    };
    writeln!(dot, "// threshold: {threshold} ({policy_name})").unwrap();
    writeln!(dot, "// edges: {} of {}", edges.len(), p * p.saturating_sub(1) / 2).unwrap();
    for cat in &key {
        writeln!(dot, "// color {}: {}", color(cat), cat).unwrap();
    }
    writeln!(dot, "graph ising {{").unwrap();
    writeln!(dot, "  graph [threshold={}];", quote(&threshold.to_string())).unwrap();
    for (j, label) in labels.iter().enumerate() {
        match categories {
            Some(c) => writeln!(
                dot,
                "  n{j} [label={}, category={}, style=filled, fillcolor={}];",
                quote(label),
                quote(&c[j]),
                quote(color(&c[j]))
            )
            .unwrap(),
            None => writeln!(dot, "  n{j} [label={}];", quote(label)).unwrap(),
        }
    }
    for &(j, k, w) in &edges {
        writeln!(dot, "  n{j} -- n{k} [weight={w}];").unwrap();
    }
    dot.push_str("}\n");
    Ok(GraphExport { threshold, edges, dot })
}
