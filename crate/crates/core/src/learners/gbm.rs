//! Gradient boosting with regression trees.

use serde::{Deserialize, Serialize};

use super::linear::{check_binary, check_xy, sigmoid};
use super::tree::{fit_cart, CartParams, Impurity, Node, Tree};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbmTask {
    Regression,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbmParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub task: GbmTask,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 1,
            task: GbmTask::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub init: f64,
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub task: GbmTask,
}

/// Binary leaves take one Newton step: `Σr / Σp(1−p)`.
fn newton_leaves(tree: &mut Tree, x: &Matrix, residuals: &[f64], probs: &[f64]) {
    let mut num = vec![0.0; tree.nodes.len()];
    let mut den = vec![0.0; tree.nodes.len()];
    for (i, row) in x.rows().enumerate() {
        let leaf = tree.leaf_index(row);
        num[leaf] += residuals[i];
        den[leaf] += probs[i] * (1.0 - probs[i]);
    }
    for id in 0..tree.nodes.len() {
        if matches!(tree.nodes[id], Node::Leaf { .. }) {
            let gamma = if den[id] > 1e-12 { num[id] / den[id] } else { 0.0 };
            tree.set_leaf_value(id, gamma);
        }
    }
}

pub fn fit_gbm(x: &Matrix, y: &[f64], params: &GbmParams) -> Result<GbmModel> {
    check_xy(x, y)?;
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument("learning_rate must be positive".into()));
    }
    let n = y.len() as f64;
    let init = match params.task {
        GbmTask::Regression => y.iter().sum::<f64>() / n,
        GbmTask::Binary => {
            check_binary(y)?;
            let p = y.iter().sum::<f64>() / n;
            if p == 0.0 || p == 1.0 {
                return Err(Error::Model("binary boosting needs both classes in the target".into()));
            }
            (p / (1.0 - p)).ln()
        }
    };
    let tree_params = CartParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        impurity: Impurity::Squared,
    };
    let mut raw = vec![init; y.len()];
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let fitted: Vec<f64> = match params.task {
            GbmTask::Regression => raw.clone(),
            GbmTask::Binary => raw.iter().map(|&f| sigmoid(f)).collect(),
        };
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let mut tree = fit_cart(x, &residuals, &tree_params)?;
        if params.task == GbmTask::Binary {
            newton_leaves(&mut tree, x, &residuals, &fitted);
        }
        for (f, row) in raw.iter_mut().zip(x.rows()) {
            *f += params.learning_rate * tree.predict_row(row);
        }
        trees.push(tree);
    }
    Ok(GbmModel {
        init,
        trees,
        learning_rate: params.learning_rate,
        task: params.task,
    })
}

impl GbmModel {
    /// Additive score using only the first `n_trees` trees.
    pub fn staged_raw(&self, row: &[f64], n_trees: usize) -> f64 {
        self.init
            + self
                .trees
                .iter()
                .take(n_trees)
                .map(|t| self.learning_rate * t.predict_row(row))
                .sum::<f64>()
    }

    pub fn raw(&self, row: &[f64]) -> f64 {
        self.staged_raw(row, self.trees.len())
    }

    pub fn proba_row(&self, row: &[f64]) -> Option<f64> {
        (self.task == GbmTask::Binary).then(|| sigmoid(self.raw(row)))
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.task {
            GbmTask::Regression => self.raw(row),
            GbmTask::Binary => {
                if sigmoid(self.raw(row)) >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mse(m: &GbmModel, x: &Matrix, y: &[f64], trees: usize) -> f64 {
        x.rows().zip(y).map(|(r, y)| (m.staged_raw(r, trees) - y).powi(2)).sum::<f64>() / y.len() as f64
    }

    #[test]
    fn depth_zero_predicts_mean() {
        let x = Matrix::column_vector(&[1.0, 2.0, 3.0, 4.0]);
        let y = [1.0, 2.0, 4.0, 9.0];
        let p = GbmParams {
            n_trees: 1,
            max_depth: 0,
            learning_rate: 1.0,
            task: GbmTask::Regression,
            ..Default::default()
        };
        let m = fit_gbm(&x, &y, &p).unwrap();
        assert!(m.predict(&x).iter().all(|&v| (v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn step_function_is_learned_and_mse_decreases() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 4.0).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v < 3.0 { 1.0 } else if v < 7.0 { 5.0 } else { -2.0 }).collect();
        let x = Matrix::column_vector(&xs);
        let p = GbmParams {
            n_trees: 50,
            max_depth: 2,
            learning_rate: 0.5,
            task: GbmTask::Regression,
            ..Default::default()
        };
        let m = fit_gbm(&x, &y, &p).unwrap();
        assert!(mse(&m, &x, &y, 50) < 1e-3);
        for t in 1..=50 {
            assert!(mse(&m, &x, &y, t) <= mse(&m, &x, &y, t - 1) + 1e-12);
        }
    }

    #[test]
    fn binary_task() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v >= 10.0 { 1.0 } else { 0.0 }).collect();
        let x = Matrix::column_vector(&xs);
        let m = fit_gbm(&x, &y, &GbmParams { n_trees: 20, ..Default::default() }).unwrap();
        assert_eq!(m.predict(&x), y);
        assert!(m.proba_row(&[19.0]).unwrap() > 0.9);
        assert!(fit_gbm(&x, &[1.0; 20], &GbmParams::default()).is_err());
    }
}
