//! Linear regression (optionally ridge or lasso) and logistic regression.
//!
//! Weight vectors passed to the objectives are laid out as `[w_1, …, w_d, bias]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gd::{gradient_descent, GDConfig, Objective};
use super::loss::PROB_EPS;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seeded_rng;

fn dot_bias(w: &[f64], row: &[f64]) -> f64 {
    let d = row.len();
    row.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>() + w[d]
}

pub(crate) fn check_xy(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::Model("empty training set".into()));
    }
    if x.n_rows() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if x.rows().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("training data contains non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn check_binary(y: &[f64]) -> Result<()> {
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidArgument("binary target must be 0 or 1".into()));
    }
    Ok(())
}

/// Mean half squared error of an affine predictor.
pub struct SquaredObjective<'a> {
    pub x: &'a Matrix,
    pub y: &'a [f64],
}

impl Objective for SquaredObjective<'_> {
    fn value(&self, w: &[f64]) -> f64 {
        let n = self.y.len() as f64;
        self.x
            .rows()
            .zip(self.y)
            .map(|(row, y)| 0.5 * (dot_bias(w, row) - y).powi(2))
            .sum::<f64>()
            / n
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.y.len() as f64;
        let d = self.x.n_cols();
        let mut g = vec![0.0; d + 1];
        for (row, y) in self.x.rows().zip(self.y) {
            let r = dot_bias(w, row) - y;
            for j in 0..d {
                g[j] += r * row[j];
            }
            g[d] += r;
        }
        g.iter_mut().for_each(|v| *v /= n);
        g
    }

    fn is_penalized(&self, index: usize) -> bool {
        index < self.x.n_cols()
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean negative log-likelihood of a logistic model.
pub struct LogLikelihoodObjective<'a> {
    pub x: &'a Matrix,
    pub y: &'a [f64],
}

impl Objective for LogLikelihoodObjective<'_> {
    fn value(&self, w: &[f64]) -> f64 {
        let n = self.y.len() as f64;
        self.x
            .rows()
            .zip(self.y)
            .map(|(row, y)| {
                let z = dot_bias(w, row);
                softplus(z) - y * z
            })
            .sum::<f64>()
            / n
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.y.len() as f64;
        let d = self.x.n_cols();
        let mut g = vec![0.0; d + 1];
        for (row, y) in self.x.rows().zip(self.y) {
            let r = sigmoid(dot_bias(w, row)) - y;
            for j in 0..d {
                g[j] += r * row[j];
            }
            g[d] += r;
        }
        g.iter_mut().for_each(|v| *v /= n);
        g
    }

    fn is_penalized(&self, index: usize) -> bool {
        index < self.x.n_cols()
    }
}

fn initial_weights(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..dim).map(|_| rng.gen_range(-1e-3..1e-3)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LinearModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }
}

pub fn fit_linear(x: &Matrix, y: &[f64], cfg: &GDConfig) -> Result<LinearModel> {
    check_xy(x, y)?;
    let obj = SquaredObjective { x, y };
    let out = gradient_descent(&obj, initial_weights(x.n_cols() + 1, cfg.seed), cfg)?;
    let mut weights = out.weights;
    let bias = weights.pop().unwrap_or(0.0);
    Ok(LinearModel {
        weights,
        bias,
        iterations: out.iterations,
        converged: out.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    #[serde(flatten)]
    pub gd: GDConfig,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            gd: GDConfig::default(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    pub fn proba_row(&self, row: &[f64]) -> f64 {
        let z = row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias;
        sigmoid(z).clamp(PROB_EPS, 1.0 - PROB_EPS)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.proba_row(r)).collect()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        self.predict_proba(x)
            .into_iter()
            .map(|p| if p >= self.threshold { 1.0 } else { 0.0 })
            .collect()
    }
}

pub fn fit_logistic(x: &Matrix, y: &[f64], params: &LogisticParams) -> Result<LogisticModel> {
    check_xy(x, y)?;
    check_binary(y)?;
    if !(params.threshold > 0.0 && params.threshold < 1.0) {
        return Err(Error::InvalidArgument("threshold must lie in (0, 1)".into()));
    }
    let obj = LogLikelihoodObjective { x, y };
    let out = gradient_descent(&obj, initial_weights(x.n_cols() + 1, params.gd.seed), &params.gd)?;
    let mut weights = out.weights;
    let bias = weights.pop().unwrap_or(0.0);
    Ok(LogisticModel {
        weights,
        bias,
        threshold: params.threshold,
        iterations: out.iterations,
        converged: out.converged,
    })
}
