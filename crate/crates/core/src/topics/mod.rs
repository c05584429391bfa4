//! Online topic pipeline: incremental PCA, mini-batch k-means, class-based
//! TF-IDF terms, topic hierarchy, coherence, dynamics and a 2-D map.

mod coherence;
mod ctfidf;
mod dynamics;
mod hierarchy;
mod kmeans;
mod map;
mod pca;

pub use coherence::{coherence_npmi, mean_coherence_of_largest, NpmiScorer};
pub use ctfidf::{ctfidf_terms, TermStats, TopicSummary};
pub use dynamics::{topic_dynamics, TimeSeries};
pub use hierarchy::{topic_hierarchy, Dendrogram, Linkage, Merge};
pub use kmeans::{fit_minibatch_kmeans, KMeansParams, TopicModel};
pub use map::intertopic_map;
pub use pca::{fit_incremental_pca, PcaModel};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TopicError {
    #[error("batch of {got} rows is smaller than the {out_dim} requested components")]
    BatchTooSmall { got: usize, out_dim: usize },
    #[error("dimension error: {0}")]
    DimError(String),
    #[error("need at least k={k} samples, got {n}")]
    TooFewSamples { n: usize, k: usize },
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("topic {0} has no documents")]
    EmptyTopic(usize),
    #[error("cannot cut {k} topics into {cut_k} clusters")]
    CutError { k: usize, cut_k: usize },
    #[error("topic {0} has fewer than two scored terms")]
    CoherenceUndefined(usize),
    #[error("intertopic map needs at least 3 topics, got {0}")]
    MapError(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TopicError> {
        if data.len() != rows * cols {
            return Err(TopicError::DimError(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, TopicError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(TopicError::DimError("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest row of `centroids` to `x`; ties go to the lowest index.
pub(crate) fn nearest(centroids: &DenseMatrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter_rows().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Per-document topic labels in `[0, k)`, aligned with corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl TopicAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self, TopicError> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(TopicError::InvalidParameter(format!("label {bad} outside [0, {k})")));
        }
        Ok(Self { labels, k })
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Document indices per topic.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Relabels topics through `map` (e.g. topic to hierarchy cluster).
    pub fn remap(&self, map: &[usize], k: usize) -> Result<Self, TopicError> {
        Self::new(self.labels.iter().map(|&l| map[l]).collect(), k)
    }
}

/// Labels each vector with its nearest centroid (Euclidean).
pub fn assign_topics(model: &TopicModel, vectors: &DenseMatrix) -> Result<TopicAssignment, TopicError> {
    if vectors.cols != model.centroids.cols {
        return Err(TopicError::DimError(format!(
            "vectors have dimension {}, centroids {}",
            vectors.cols, model.centroids.cols
        )));
    }
    let labels: Vec<usize> = (0..vectors.rows)
        .into_par_iter()
        .map(|i| nearest(&model.centroids, vectors.row(i)).0)
        .collect();
    TopicAssignment::new(labels, model.k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(centroids: Vec<Vec<f64>>) -> TopicModel {
        let k = centroids.len();
        TopicModel {
            centroids: DenseMatrix::from_rows(&centroids).unwrap(),
            counts: vec![0; k],
            k,
            seed: 0,
        }
    }

    #[test]
    fn assignment_examples() {
        let m = model(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![5.0, 5.0],
            vec![2.0, 3.0],
            vec![-1.0, 0.0],
        ]);
        let pts = DenseMatrix::from_rows(&[vec![2.0, 3.0], vec![0.0, 0.0], vec![0.5, 0.0]]).unwrap();
        let a = assign_topics(&m, &pts).unwrap();
        assert_eq!(a.labels[0], 3);
        assert_eq!(a.labels[1], 0);
        // Equidistant to centroids 0 and 1.
        assert_eq!(a.labels[2], 0);
        assert_eq!(assign_topics(&m, &pts).unwrap(), a);
    }

    #[test]
    fn tie_between_one_and_four() {
        let m = model(vec![
            vec![9.0, 9.0],
            vec![1.0, 0.0],
            vec![9.0, -9.0],
            vec![-9.0, 9.0],
            vec![-1.0, 0.0],
        ]);
        let pts = DenseMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(assign_topics(&m, &pts).unwrap().labels, vec![1]);
    }

    #[test]
    fn dim_mismatch() {
        let m = model(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let pts = DenseMatrix::from_rows(&[vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(assign_topics(&m, &pts), Err(TopicError::DimError(_))));
    }
}
