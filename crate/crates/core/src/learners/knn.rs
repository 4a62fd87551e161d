//! k-nearest-neighbour classification under a weighted Minkowski distance.

use serde::{Deserialize, Serialize};

use super::linear::check_xy;
use super::tree::class_labels;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
    /// Minkowski exponent, at least 1.
    pub p: f64,
    /// Per-feature weights; all ones when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_weights: Option<Vec<f64>>,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 5,
            p: 2.0,
            feature_weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub rows: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub k: usize,
    pub p: f64,
    pub feature_weights: Vec<f64>,
}

/// `(Σ w_j |a_j − b_j|^p)^(1/p)`.
pub fn minkowski(a: &[f64], b: &[f64], weights: &[f64], p: f64) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y).abs().powf(p))
        .sum();
    s.powf(1.0 / p)
}

pub fn fit_knn(x: &Matrix, y: &[f64], params: &KnnParams) -> Result<KnnModel> {
    check_xy(x, y)?;
    if params.k == 0 || params.k > x.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "k = {} must lie in 1..={}",
            params.k,
            x.n_rows()
        )));
    }
    if !(params.p >= 1.0 && params.p.is_finite()) {
        return Err(Error::InvalidArgument("minkowski p must be at least 1".into()));
    }
    let weights = params.feature_weights.clone().unwrap_or_else(|| vec![1.0; x.n_cols()]);
    if weights.len() != x.n_cols() || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument("feature weights must be non-negative, one per feature".into()));
    }
    let (labels, n_classes) = class_labels(y)?;
    Ok(KnnModel {
        rows: x.clone(),
        labels,
        n_classes,
        k: params.k,
        p: params.p,
        feature_weights: weights,
    })
}

impl KnnModel {
    /// Vote counts per class among the k nearest rows, with their summed distances.
    fn votes(&self, row: &[f64]) -> (Vec<usize>, Vec<f64>) {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .rows()
            .enumerate()
            .map(|(i, r)| (minkowski(row, r, &self.feature_weights, self.p), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut counts = vec![0usize; self.n_classes];
        let mut sums = vec![0.0; self.n_classes];
        for &(d, i) in &dist[..self.k] {
            counts[self.labels[i]] += 1;
            sums[self.labels[i]] += d;
        }
        (counts, sums)
    }

    /// Majority class; ties go to the smaller summed distance, then the lower class.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let (counts, sums) = self.votes(row);
        let mut best = 0;
        for c in 1..self.n_classes {
            if counts[c] > counts[best] || (counts[c] == counts[best] && sums[c] < sums[best]) {
                best = c;
            }
        }
        best as f64
    }

    /// Share of neighbours voting for class 1.
    pub fn proba_row(&self, row: &[f64]) -> f64 {
        let (counts, _) = self.votes(row);
        counts.get(1).copied().unwrap_or(0) as f64 / self.k as f64
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }
}
