use crate::error::{Error, Result};
use crate::model::{BinaryDataset, SimilarityMatrix};

/// Stacked logistic design of the pseudo-likelihood.
///
/// Row `r = j * n + i` holds response `y_ij`; the model matrix is
/// `(I_p ⊗ 1_n, X)` where row `r` of `X` is
/// `(W_1[j,·] · y_i, …, W_K[j,·] · y_i)`. The block structure of the
/// intercepts is implicit. `X` is stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedDesign {
    n_obs: usize,
    n_blocks: usize,
    k: usize,
    response: Vec<f64>,
    x: Vec<f64>,
    column_labels: Vec<String>,
}

impl StackedDesign {
    /// Generic constructor; `columns[k]` has one entry per stacked row.
    pub fn from_parts(n_obs: usize, n_blocks: usize, response: Vec<f64>, columns: Vec<Vec<f64>>, column_labels: Vec<String>) -> Result<Self> {
        let rows = n_obs * n_blocks;
        if response.len() != rows {
            return Err(Error::Dimension(format!("response has {} rows, expected {rows}", response.len())));
        }
        if column_labels.len() != columns.len() {
            return Err(Error::Dimension("one label per column required".into()));
        }
        if let Some(k) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::Dimension(format!("column {k} has {} rows, expected {rows}", columns[k].len())));
        }
        if response.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidInput("stacked response must be 0/1".into()));
        }
        Ok(Self {
            n_obs,
            n_blocks,
            k: columns.len(),
            response,
            x: columns.concat(),
            column_labels,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// Number of intercept blocks (the number of responses `p`).
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.n_obs * self.n_blocks
    }

    #[inline]
    pub fn row_index(&self, i: usize, j: usize) -> usize {
        j * self.n_obs + i
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    #[inline]
    pub fn column(&self, k: usize) -> &[f64] {
        let rows = self.rows();
        &self.x[k * rows..(k + 1) * rows]
    }

    #[inline]
    pub fn x(&self, row: usize, k: usize) -> f64 {
        self.x[k * self.rows() + row]
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    /// Row range of intercept block `b`.
    #[inline]
    pub fn block(&self, b: usize) -> std::ops::Range<usize> {
        b * self.n_obs..(b + 1) * self.n_obs
    }

    /// Design restricted to the listed observations (rows `i`), preserving the
    /// stacking order.
    pub fn subset_observations(&self, obs: &[usize]) -> Self {
        let n = obs.len();
        let rows = n * self.n_blocks;
        let mut response = Vec::with_capacity(rows);
        for j in 0..self.n_blocks {
            response.extend(obs.iter().map(|&i| self.response[self.row_index(i, j)]));
        }
        let mut x = Vec::with_capacity(rows * self.k);
        for k in 0..self.k {
            let col = self.column(k);
            for j in 0..self.n_blocks {
                x.extend(obs.iter().map(|&i| col[self.row_index(i, j)]));
            }
        }
        Self {
            n_obs: n,
            n_blocks: self.n_blocks,
            k: self.k,
            response,
            x,
            column_labels: self.column_labels.clone(),
        }
    }

    /// Design with only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut x = Vec::with_capacity(cols.len() * self.rows());
        for &k in cols {
            x.extend_from_slice(self.column(k));
        }
        Self {
            n_obs: self.n_obs,
            n_blocks: self.n_blocks,
            k: cols.len(),
            response: self.response.clone(),
            x,
            column_labels: cols.iter().map(|&k| self.column_labels[k].clone()).collect(),
        }
    }

    /// Blocks whose responses are all equal.
    pub fn constant_blocks(&self) -> Vec<usize> {
        (0..self.n_blocks)
            .filter(|&b| {
                let r = &self.response[self.block(b)];
                r.iter().all(|&v| v == r[0])
            })
            .collect()
    }
}

/// Builds the stacked design for the pseudo-likelihood of `data` under `sims`.
pub fn build_design(data: &BinaryDataset, sims: &[SimilarityMatrix]) -> Result<StackedDesign> {
    let (n, p) = (data.n(), data.p());
    for (index, s) in sims.iter().enumerate() {
        if s.dim() != p {
            return Err(Error::SimilarityShape {
                index,
                label: s.label().to_string(),
                reason: format!("dimension {} does not match p = {p}", s.dim()),
            });
        }
    }
    let rows = n * p;
    let mut response = vec![0.0; rows];
    for j in 0..p {
        for i in 0..n {
            response[j * n + i] = data.get(i, j) as f64;
        }
    }
    let columns: Vec<Vec<f64>> = sims
        .iter()
        .map(|s| {
            let mut col = vec![0.0; rows];
            for j in 0..p {
                let neighbours: Vec<(usize, f64)> = (0..p).filter(|&l| l != j && s.get(j, l) != 0.0).map(|l| (l, s.get(j, l))).collect();
                if neighbours.is_empty() {
                    continue;
                }
                for i in 0..n {
                    let row = data.row(i);
                    col[j * n + i] = neighbours.iter().filter(|(l, _)| row[*l] != 0).map(|(_, w)| w).sum();
                }
            }
            col
        })
        .collect();
    let labels = sims.iter().map(|s| s.label().to_string()).collect();
    StackedDesign::from_parts(n, p, response, columns, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SimilarityKind;
    use nalgebra::DMatrix;

    fn half() -> SimilarityMatrix {
        SimilarityMatrix::from_rows("w", SimilarityKind::Raw, &[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap()
    }

    #[test]
    fn zero_similarity_gives_zero_columns() {
        let data = BinaryDataset::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let d = build_design(&data, &[SimilarityMatrix::zeros("z", 3)]).unwrap();
        assert!(d.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_rows() {
        let data = BinaryDataset::from_rows(&[vec![1, 1]]).unwrap();
        let d = build_design(&data, &[half()]).unwrap();
        assert_eq!(d.column(0), &[0.5, 0.5]);
        assert_eq!(d.response(), &[1.0, 1.0]);
    }

    #[test]
    fn entries_match_definition() {
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 0.2, 0.7, 0.2, 0.0, 1.5, 0.7, 1.5, 0.0]);
        let sim = SimilarityMatrix::new("w", SimilarityKind::Raw, w).unwrap();
        let data = BinaryDataset::from_rows(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        let d = build_design(&data, std::slice::from_ref(&sim)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected: f64 = (0..3).filter(|&l| l != j).map(|l| sim.get(j, l) * data.get(i, l) as f64).sum();
                assert_eq!(d.x(d.row_index(i, j), 0), expected);
                assert_eq!(d.response()[d.row_index(i, j)], data.get(i, j) as f64);
            }
        }
    }

    #[test]
    fn observation_permutation_permutes_within_blocks() {
        let sim = SimilarityMatrix::from_rows("w", SimilarityKind::Raw, &[vec![0.0, 1.0, 0.3], vec![1.0, 0.0, 0.0], vec![0.3, 0.0, 0.0]]).unwrap();
        let data = BinaryDataset::from_rows(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0], vec![0, 0, 1]]).unwrap();
        let perm = [2, 0, 3, 1];
        let a = build_design(&data, std::slice::from_ref(&sim)).unwrap();
        let b = build_design(&data.subset(&perm), std::slice::from_ref(&sim)).unwrap();
        assert_eq!(a.subset_observations(&perm), b);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = BinaryDataset::from_rows(&[vec![1, 1, 0]]).unwrap();
        assert!(build_design(&data, &[half()]).is_err());
    }
}
