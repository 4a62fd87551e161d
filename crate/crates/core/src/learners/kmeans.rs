//! Lloyd's k-means with seeded initialisation.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::knn::minkowski;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seeded_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmeansParams {
    pub k: usize,
    /// Stop once the summed centroid movement falls below this.
    pub tolerance: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub p: f64,
}

impl Default for KmeansParams {
    fn default() -> Self {
        Self {
            k: 2,
            tolerance: 1e-6,
            max_iters: 100,
            seed: 0,
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansModel {
    pub centroids: Matrix,
    pub p: f64,
    pub iterations: usize,
    /// Sum of squared point-to-centroid distances after each assignment step.
    pub objective_history: Vec<f64>,
}

fn nearest(row: &[f64], centroids: &[Vec<f64>], weights: &[f64], p: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = minkowski(row, c, weights, p);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Seeds k distinct rows: the first uniformly, the rest with probability
/// proportional to the squared distance from the nearest chosen centroid.
fn init_centroids(x: &Matrix, k: usize, p: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let too_few = |found: usize| {
        Error::InvalidArgument(format!("k = {k} exceeds the {found} distinct rows"))
    };
    if x.n_rows() == 0 {
        return Err(too_few(0));
    }
    let mut rng = seeded_rng(seed);
    let weights = vec![1.0; x.n_cols()];
    let mut centroids = vec![x.row(rng.gen_range(0..x.n_rows())).to_vec()];
    while centroids.len() < k {
        let d2: Vec<f64> = x.rows().map(|r| nearest(r, &centroids, &weights, p).1.powi(2)).collect();
        let Ok(dist) = WeightedIndex::new(&d2) else {
            return Err(too_few(centroids.len()));
        };
        centroids.push(x.row(dist.sample(&mut rng)).to_vec());
    }
    Ok(centroids)
}

pub fn kmeans(x: &Matrix, params: &KmeansParams) -> Result<KmeansModel> {
    if params.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(params.p >= 1.0) || params.max_iters == 0 {
        return Err(Error::InvalidArgument("k-means needs p >= 1 and max_iters >= 1".into()));
    }
    let weights = vec![1.0; x.n_cols()];
    let mut centroids = init_centroids(x, params.k, params.p, params.seed)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        let assigned: Vec<(usize, f64)> = x.rows().map(|r| nearest(r, &centroids, &weights, params.p)).collect();
        history.push(assigned.iter().map(|(_, d)| d * d).sum());

        let mut sums = vec![vec![0.0; x.n_cols()]; params.k];
        let mut counts = vec![0usize; params.k];
        for (row, &(j, _)) in x.rows().zip(&assigned) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(row) {
                *s += v;
            }
        }
        // Empty clusters move to the points farthest from their own centroids.
        let mut by_distance: Vec<usize> = (0..x.n_rows()).collect();
        by_distance.sort_by(|&a, &b| assigned[b].1.total_cmp(&assigned[a].1).then(a.cmp(&b)));
        let mut donors = by_distance.into_iter();
        let mut movement = 0.0;
        for j in 0..params.k {
            let next = if counts[j] > 0 {
                sums[j].iter().map(|s| s / counts[j] as f64).collect()
            } else {
                donors.next().map_or_else(|| centroids[j].clone(), |i| x.row(i).to_vec())
            };
            movement += minkowski(&centroids[j], &next, &weights, params.p);
            centroids[j] = next;
        }
        if movement < params.tolerance {
            break;
        }
    }
    Ok(KmeansModel {
        centroids: Matrix::from_rows(&centroids)?,
        p: params.p,
        iterations,
        objective_history: history,
    })
}

impl KmeansModel {
    pub fn k(&self) -> usize {
        self.centroids.n_rows()
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn assign(&self, row: &[f64]) -> usize {
        let centroids: Vec<Vec<f64>> = self.centroids.rows().map(<[f64]>::to_vec).collect();
        nearest(row, &centroids, &vec![1.0; row.len()], self.p).0
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.assign(r) as f64).collect()
    }
}
