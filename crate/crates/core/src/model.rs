//! Domain types of the Ising similarity regression model and the exact and
//! conditional probability computations built on them.
//!
//! The interaction matrix is modelled as
//!
//! ```text
//! Θ = Σ_j θ_jj Δ_jj + Σ_k α_k W_k
//! ```
//!
//! so a response vector `u ∈ {0,1}^p` has probability proportional to
//! `exp(Σ_j θ_jj u_j + Σ_{j<j'} Θ_jj' u_j u_j')`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bernoulli_loglik, logistic, LogSumExp};
use crate::similarity;

/// Largest `p` for which the partition function is computed by enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Tolerance on `|W - Wᵀ|` accepted when constructing a similarity matrix.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityKind {
    QuantitativeDerived,
    QualitativeDerived,
    Adjacency,
    Raw,
}

/// A symmetric, zero-diagonal `p × p` similarity matrix `W_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SimilarityRecord", into = "SimilarityRecord")]
pub struct SimilarityMatrix {
    label: String,
    kind: SimilarityKind,
    values: DMatrix<f64>,
}

impl SimilarityMatrix {
    /// Validates the invariants and symmetrizes away rounding-level asymmetry.
    pub fn new(label: impl Into<String>, kind: SimilarityKind, values: DMatrix<f64>) -> Result<Self> {
        let label = label.into();
        if values.nrows() != values.ncols() || values.nrows() == 0 {
            return Err(Error::InvalidSimilarity {
                label,
                reason: format!("expected a non-empty square matrix, got {}x{}", values.nrows(), values.ncols()),
            });
        }
        let diag = similarity::validate(&values);
        if !diag.all_finite {
            return Err(Error::InvalidSimilarity {
                label,
                reason: "non-finite entry".into(),
            });
        }
        if diag.max_abs_diagonal != 0.0 {
            return Err(Error::InvalidSimilarity {
                label,
                reason: format!("non-zero diagonal (max |w_jj| = {})", diag.max_abs_diagonal),
            });
        }
        if diag.symmetry_residual > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidSimilarity {
                label,
                reason: format!("not symmetric (max |w_jk - w_kj| = {:e})", diag.symmetry_residual),
            });
        }
        let values = (&values + values.transpose()) * 0.5;
        Ok(Self { label, kind, values })
    }

    pub fn from_rows(label: impl Into<String>, kind: SimilarityKind, rows: &[Vec<f64>]) -> Result<Self> {
        let label = label.into();
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidSimilarity {
                label,
                reason: "rows must all have length p".into(),
            });
        }
        let values = DMatrix::from_fn(p, p, |j, k| rows[j][k]);
        Self::new(label, kind, values)
    }

    pub fn zeros(label: impl Into<String>, p: usize) -> Self {
        Self {
            label: label.into(),
            kind: SimilarityKind::Raw,
            values: DMatrix::zeros(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j, k)]
    }

    /// Relabels responses: entry `(a, b)` of the result is entry
    /// `(perm[a], perm[b])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let p = self.dim();
        Self {
            label: self.label.clone(),
            kind: self.kind,
            values: DMatrix::from_fn(p, p, |a, b| self.values[(perm[a], perm[b])]),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Main effects `θ_11..θ_pp` and similarity coefficients `α_1..α_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub main_effects: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl ParameterSet {
    pub fn new(main_effects: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if main_effects.iter().chain(&alpha).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        Ok(Self { main_effects, alpha })
    }

    pub fn zeros(p: usize, k: usize) -> Self {
        Self {
            main_effects: vec![0.0; p],
            alpha: vec![0.0; k],
        }
    }

    pub fn p(&self) -> usize {
        self.main_effects.len()
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// Indices of non-zero similarity coefficients.
    pub fn active_set(&self) -> Vec<usize> {
        self.alpha
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ParameterSet, b: f64) -> ParameterSet {
        ParameterSet {
            main_effects: self
                .main_effects
                .iter()
                .zip(&other.main_effects)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            alpha: self.alpha.iter().zip(&other.alpha).map(|(x, y)| a * x + b * y).collect(),
        }
    }
}

/// The symmetric interaction matrix Θ; the diagonal holds the main effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct InteractionMatrix {
    values: DMatrix<f64>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let p = rows.len();
    if let Some(r) = rows.iter().position(|r| r.len() != p) {
        return Err(Error::Dimension(format!("row {r} has {} entries, expected {p}", rows[r].len())));
    }
    Ok(DMatrix::from_fn(p, p, |a, b| rows[a][b]))
}

/// Serialized form of [`SimilarityMatrix`], validated on the way in.
#[derive(Serialize, Deserialize)]
struct SimilarityRecord {
    label: String,
    kind: SimilarityKind,
    values: Vec<Vec<f64>>,
}

impl TryFrom<SimilarityRecord> for SimilarityMatrix {
    type Error = Error;

    fn try_from(r: SimilarityRecord) -> Result<Self> {
        SimilarityMatrix::new(r.label, r.kind, matrix_from_rows(&r.values)?)
    }
}

impl From<SimilarityMatrix> for SimilarityRecord {
    fn from(m: SimilarityMatrix) -> Self {
        Self {
            values: matrix_rows(&m.values),
            label: m.label,
            kind: m.kind,
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for InteractionMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        InteractionMatrix::from_matrix(matrix_from_rows(&rows)?)
    }
}

impl From<InteractionMatrix> for Vec<Vec<f64>> {
    fn from(m: InteractionMatrix) -> Self {
        matrix_rows(&m.values)
    }
}

impl InteractionMatrix {
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::Dimension("interaction matrix must be square".into()));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j, k)]
    }

    /// Upper-triangle off-diagonal entries `(j, j', θ_jj')` with `j < j'`.
    pub fn off_diagonal(&self) -> Vec<(usize, usize, f64)> {
        let p = self.dim();
        let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
        for j in 0..p {
            for k in (j + 1)..p {
                out.push((j, k, self.values[(j, k)]));
            }
        }
        out
    }

    /// Log-odds of `y_j = 1` given the other coordinates of `y`.
    #[inline]
    pub fn local_field(&self, j: usize, y: &[u8]) -> f64 {
        let mut eta = self.values[(j, j)];
        for (k, &yk) in y.iter().enumerate() {
            if k != j && yk != 0 {
                eta += self.values[(j, k)];
            }
        }
        eta
    }

    /// Unnormalized log weight `Σ_j θ_jj u_j + Σ_{j<j'} θ_jj' u_j u_j'`.
    pub fn log_weight(&self, u: &[u8]) -> f64 {
        let p = self.dim();
        let mut total = 0.0;
        for j in 0..p {
            if u[j] == 0 {
                continue;
            }
            total += self.values[(j, j)];
            for k in (j + 1)..p {
                if u[k] != 0 {
                    total += self.values[(j, k)];
                }
            }
        }
        total
    }
}

/// `n` observations of `p` binary responses, stored row-major as bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    n: usize,
    p: usize,
    y: Vec<u8>,
    labels: Vec<String>,
}

impl BinaryDataset {
    pub fn new(n: usize, p: usize, y: Vec<u8>) -> Result<Self> {
        let labels = default_labels(p);
        Self::with_labels(n, p, y, labels)
    }

    pub fn with_labels(n: usize, p: usize, y: Vec<u8>, labels: Vec<String>) -> Result<Self> {
        if y.len() != n * p {
            return Err(Error::Dimension(format!("expected {} entries for {n}x{p} data, got {}", n * p, y.len())));
        }
        if labels.len() != p {
            return Err(Error::Dimension(format!("expected {p} response labels, got {}", labels.len())));
        }
        if let Some(pos) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidInput(format!(
                "non-binary entry {} at row {}, column {}",
                y[pos],
                pos / p,
                pos % p
            )));
        }
        Ok(Self { n, p, y, labels })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("rows have unequal lengths".into()));
        }
        Self::new(n, p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn raw(&self) -> &[u8] {
        &self.y
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.y[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.y[i * self.p + j]
    }

    /// Dataset restricted to the listed observations, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let mut y = Vec::with_capacity(rows.len() * self.p);
        for &i in rows {
            y.extend_from_slice(self.row(i));
        }
        Self {
            n: rows.len(),
            p: self.p,
            y,
            labels: self.labels.clone(),
        }
    }

    /// Responses relabeled so that new column `a` is old column `perm[a]`.
    pub fn permuted_columns(&self, perm: &[usize]) -> Self {
        let mut y = Vec::with_capacity(self.y.len());
        for i in 0..self.n {
            let row = self.row(i);
            y.extend(perm.iter().map(|&j| row[j]));
        }
        Self {
            n: self.n,
            p: self.p,
            y,
            labels: perm.iter().map(|&j| self.labels[j].clone()).collect(),
        }
    }

    /// Column means `ȳ_j`.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.p];
        for i in 0..self.n {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v as f64;
            }
        }
        sums.iter().map(|s| s / self.n.max(1) as f64).collect()
    }

    /// Columns whose entries are all equal.
    pub fn constant_columns(&self) -> Vec<usize> {
        (0..self.p)
            .filter(|&j| {
                let first = self.get(0, j);
                (1..self.n).all(|i| self.get(i, j) == first)
            })
            .collect()
    }
}

pub fn default_labels(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("y{j}")).collect()
}

/// Checks that all similarity matrices share one dimension and returns it.
pub fn common_dim(sims: &[SimilarityMatrix]) -> Result<Option<usize>> {
    let Some(first) = sims.first() else {
        return Ok(None);
    };
    let p = first.dim();
    for (index, s) in sims.iter().enumerate() {
        if s.dim() != p {
            return Err(Error::SimilarityShape {
                index,
                label: s.label().to_string(),
                reason: format!("dimension {} differs from {p}", s.dim()),
            });
        }
    }
    Ok(Some(p))
}

fn check_model(params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<usize> {
    let p = params.p();
    if params.k() != sims.len() {
        return Err(Error::Dimension(format!(
            "{} coefficients but {} similarity matrices",
            params.k(),
            sims.len()
        )));
    }
    for (index, s) in sims.iter().enumerate() {
        if s.dim() != p {
            return Err(Error::SimilarityShape {
                index,
                label: s.label().to_string(),
                reason: format!("dimension {} does not match p = {p}", s.dim()),
            });
        }
    }
    Ok(p)
}

/// Assembles `Θ = Σ_j θ_jj Δ_jj + Σ_k α_k W_k`.
pub fn assemble_theta(params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<InteractionMatrix> {
    let p = check_model(params, sims)?;
    let mut values = DMatrix::zeros(p, p);
    for (a, s) in params.alpha.iter().zip(sims) {
        if *a != 0.0 {
            values += s.values() * *a;
        }
    }
    for (j, t) in params.main_effects.iter().enumerate() {
        values[(j, j)] = *t;
    }
    Ok(InteractionMatrix { values })
}

/// Exact distribution over `{0,1}^p`, obtained by enumerating all states.
///
/// State `s` corresponds to `u_j = (s >> j) & 1`.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    p: usize,
    log_weights: Vec<f64>,
    log_partition: f64,
}

impl ExactDistribution {
    pub fn new(theta: &InteractionMatrix) -> Result<Self> {
        let p = theta.dim();
        if p > ENUMERATION_CAP {
            return Err(Error::EnumerationCap { p, cap: ENUMERATION_CAP });
        }
        let states = 1usize << p;
        let mut log_weights = vec![0.0; states];
        let mut acc = LogSumExp::default();
        acc.push(0.0);
        for s in 1..states {
            // Peel the lowest set bit: w(s) = w(rest) + θ_bb + Σ_{j ∈ rest} θ_bj.
            let b = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            let mut w = log_weights[rest] + theta.get(b, b);
            let mut bits = rest;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                w += theta.get(b, j);
                bits &= bits - 1;
            }
            log_weights[s] = w;
            acc.push(w);
        }
        Ok(Self {
            p,
            log_weights,
            log_partition: acc.value(),
        })
    }

    pub fn from_params(params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<Self> {
        let p = check_model(params, sims)?;
        if p > ENUMERATION_CAP {
            return Err(Error::EnumerationCap { p, cap: ENUMERATION_CAP });
        }
        Self::new(&assemble_theta(params, sims)?)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_states(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn log_pmf_index(&self, s: usize) -> f64 {
        self.log_weights[s] - self.log_partition
    }

    pub fn log_pmf(&self, u: &[u8]) -> f64 {
        self.log_pmf_index(state_index(u))
    }

    /// Probabilities of all `2^p` states, indexed as in [`state_index`].
    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| (w - self.log_partition).exp()).collect()
    }
}

/// Encodes a binary vector as a state index (bit `j` = `u_j`).
pub fn state_index(u: &[u8]) -> usize {
    u.iter().enumerate().fold(0, |s, (j, &v)| s | ((v as usize & 1) << j))
}

/// Decodes a state index into a binary vector of length `p`.
pub fn state_vector(s: usize, p: usize) -> Vec<u8> {
    (0..p).map(|j| ((s >> j) & 1) as u8).collect()
}

/// `log f(u; ϑ)` with the partition function computed by enumeration.
pub fn exact_log_pmf(u: &[u8], params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<f64> {
    let p = check_model(params, sims)?;
    if u.len() != p {
        return Err(Error::Dimension(format!("state has length {}, expected {p}", u.len())));
    }
    if u.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("state entries must be 0 or 1".into()));
    }
    Ok(ExactDistribution::from_params(params, sims)?.log_pmf(u))
}

/// `P(y_j = 1 | y_{\j})`, where `y_rest` lists the other `p - 1` responses in order.
pub fn conditional_prob(j: usize, y_rest: &[u8], params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<f64> {
    let p = check_model(params, sims)?;
    if j >= p {
        return Err(Error::InvalidInput(format!("response index {j} out of range for p = {p}")));
    }
    if y_rest.len() + 1 != p {
        return Err(Error::Dimension(format!("expected {} other responses, got {}", p - 1, y_rest.len())));
    }
    if y_rest.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("responses must be 0 or 1".into()));
    }
    let mut eta = params.main_effects[j];
    for (a, s) in params.alpha.iter().zip(sims) {
        let mut covariate = 0.0;
        for (r, &v) in y_rest.iter().enumerate() {
            if v != 0 {
                let other = if r < j { r } else { r + 1 };
                covariate += s.get(j, other);
            }
        }
        eta += a * covariate;
    }
    Ok(logistic(eta))
}

/// Summed log pseudo-likelihood `Σ_i Σ_j log f_j(y_ij | y_{i\j}; ϑ)`.
pub fn log_pseudo_likelihood_sum(data: &BinaryDataset, params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<f64> {
    let p = check_model(params, sims)?;
    if data.p() != p {
        return Err(Error::Dimension(format!("data has p = {}, model has p = {p}", data.p())));
    }
    let theta = assemble_theta(params, sims)?;
    let mut total = 0.0;
    for i in 0..data.n() {
        let row = data.row(i);
        for j in 0..p {
            total += bernoulli_loglik(row[j] as f64, theta.local_field(j, row));
        }
    }
    Ok(total)
}

/// Mean log pseudo-likelihood, `(1/(np)) Σ_i Σ_j log f_j(y_ij | y_{i\j}; ϑ)`.
pub fn log_pseudo_likelihood(data: &BinaryDataset, params: &ParameterSet, sims: &[SimilarityMatrix]) -> Result<f64> {
    let total = log_pseudo_likelihood_sum(data, params, sims)?;
    let count = (data.n() * data.p()).max(1) as f64;
    Ok(total / count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ones_offdiag(p: usize) -> SimilarityMatrix {
        let values = DMatrix::from_fn(p, p, |j, k| if j == k { 0.0 } else { 1.0 });
        SimilarityMatrix::new("ones", SimilarityKind::Raw, values).unwrap()
    }

    #[test]
    fn zero_alpha_gives_diagonal_theta() {
        let params = ParameterSet::new(vec![0.3, -1.0, 2.0], vec![0.0]).unwrap();
        let theta = assemble_theta(&params, &[ones_offdiag(3)]).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let expected = if j == k { params.main_effects[j] } else { 0.0 };
                assert_eq!(theta.get(j, k), expected);
            }
        }
    }

    #[test]
    fn single_term_linearity() {
        let w = SimilarityMatrix::from_rows("w", SimilarityKind::Raw, &[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let params = ParameterSet::new(vec![0.0, 0.0], vec![2.0]).unwrap();
        let theta = assemble_theta(&params, &[w]).unwrap();
        assert_eq!(theta.get(0, 1), 1.0);
        assert_eq!(theta.get(1, 0), 1.0);
    }

    #[test]
    fn dimension_mismatch_names_matrix() {
        let params = ParameterSet::zeros(3, 2);
        let err = assemble_theta(&params, &[ones_offdiag(3), ones_offdiag(4)]).unwrap_err();
        match err {
            Error::SimilarityShape { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(assemble_theta(&ParameterSet::zeros(3, 1), &[]).is_err());
    }

    #[test]
    fn similarity_constructor_rejects_bad_input() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(SimilarityMatrix::new("a", SimilarityKind::Raw, asym).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(SimilarityMatrix::new("d", SimilarityKind::Raw, diag).is_err());
        let nan = DMatrix::from_row_slice(2, 2, &[0.0, f64::NAN, f64::NAN, 0.0]);
        assert!(SimilarityMatrix::new("n", SimilarityKind::Raw, nan).is_err());
    }

    #[test]
    fn uniform_under_zero_parameters() {
        let params = ParameterSet::zeros(2, 1);
        let sims = [ones_offdiag(2)];
        for s in 0..4 {
            let lp = exact_log_pmf(&state_vector(s, 2), &params, &sims).unwrap();
            assert_abs_diff_eq!(lp, 0.25f64.ln(), epsilon = 1e-15);
        }
    }

    #[test]
    fn three_node_enumeration_case() {
        // Weight of a state is 2^(#pairs both one); brute-force Z over 8 states.
        let params = ParameterSet::new(vec![0.0; 3], vec![2f64.ln()]).unwrap();
        let sims = [ones_offdiag(3)];
        let mut z = 0.0;
        for s in 0..8usize {
            let u = state_vector(s, 3);
            let ones = u.iter().filter(|&&v| v == 1).count();
            z += 2f64.powi((ones * ones.saturating_sub(1) / 2) as i32);
        }
        assert_eq!(z, 18.0);
        let p111 = exact_log_pmf(&[1, 1, 1], &params, &sims).unwrap().exp();
        assert_abs_diff_eq!(p111, 8.0 / 18.0, epsilon = 1e-14);
        let p110 = exact_log_pmf(&[1, 1, 0], &params, &sims).unwrap().exp();
        assert_abs_diff_eq!(p110, 2.0 / 18.0, epsilon = 1e-14);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let params = ParameterSet::zeros(21, 0);
        let err = exact_log_pmf(&[0; 21], &params, &[]).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { p: 21, .. }));
        assert!(err.to_string().contains("Gibbs"));
    }

    #[test]
    fn conditional_prob_simple_cases() {
        let sims = [ones_offdiag(3)];
        let zero = ParameterSet::zeros(3, 1);
        assert_eq!(conditional_prob(1, &[1, 0], &zero, &sims).unwrap(), 0.5);
        let intercept = ParameterSet::new(vec![1.0; 3], vec![0.0]).unwrap();
        assert_abs_diff_eq!(conditional_prob(0, &[1, 1], &intercept, &sims).unwrap(), 0.731_058_578_6, epsilon = 1e-9);
        assert!(conditional_prob(3, &[1, 1], &zero, &sims).is_err());
        assert!(conditional_prob(0, &[1], &zero, &sims).is_err());
    }

    #[test]
    fn pseudo_likelihood_zero_parameters_is_log_half() {
        let data = BinaryDataset::from_rows(&[vec![1, 0, 1], vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        let v = log_pseudo_likelihood(&data, &ParameterSet::zeros(3, 1), &[ones_offdiag(3)]).unwrap();
        assert_abs_diff_eq!(v, 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn pseudo_likelihood_single_observation_by_hand() {
        let w = SimilarityMatrix::from_rows("w", SimilarityKind::Raw, &[vec![0.0, 0.7], vec![0.7, 0.0]]).unwrap();
        let params = ParameterSet::new(vec![0.2, -0.4], vec![1.5]).unwrap();
        let data = BinaryDataset::from_rows(&[vec![1, 0]]).unwrap();
        let sims = [w];
        let p0 = conditional_prob(0, &[0], &params, &sims).unwrap();
        let p1 = conditional_prob(1, &[1], &params, &sims).unwrap();
        let expected = (p0.ln() + (1.0 - p1).ln()) / 2.0;
        assert_abs_diff_eq!(log_pseudo_likelihood(&data, &params, &sims).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn binary_dataset_rejects_non_binary() {
        assert!(BinaryDataset::new(1, 2, vec![0, 2]).is_err());
        assert!(BinaryDataset::new(1, 2, vec![0]).is_err());
    }
}
