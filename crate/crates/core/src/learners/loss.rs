//! Pointwise losses and node impurity measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities are clipped to `[PROB_EPS, 1 − PROB_EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Squared,
    Absolute,
    Huber { delta: f64 },
    CrossEntropy,
    /// Margin loss; `truth` is ±1 and `prediction` a raw score.
    Hinge,
}

impl LossKind {
    pub fn huber(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta.is_finite() {
            Ok(LossKind::Huber { delta })
        } else {
            Err(Error::InvalidArgument(format!("huber delta must be positive, got {delta}")))
        }
    }
}

pub fn clip_probability(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

pub fn loss(kind: LossKind, prediction: f64, truth: f64) -> f64 {
    let r = prediction - truth;
    match kind {
        LossKind::Squared => 0.5 * r * r,
        LossKind::Absolute => r.abs(),
        LossKind::Huber { delta } => {
            if r.abs() <= delta {
                0.5 * r * r
            } else {
                delta * (r.abs() - delta / 2.0)
            }
        }
        LossKind::CrossEntropy => {
            let p = clip_probability(prediction);
            -(truth * p.ln() + (1.0 - truth) * (1.0 - p).ln())
        }
        LossKind::Hinge => (1.0 - truth * prediction).max(0.0),
    }
}

fn proportions(counts: &[usize]) -> Result<impl Iterator<Item = f64> + '_> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("impurity of an empty node".into()));
    }
    Ok(counts.iter().map(move |&c| c as f64 / total as f64))
}

/// `1 − Σ p_k²`.
pub fn gini(counts: &[usize]) -> Result<f64> {
    Ok(1.0 - proportions(counts)?.map(|p| p * p).sum::<f64>())
}

/// `−Σ p_k ln p_k`, with empty classes contributing 0.
pub fn entropy_impurity(counts: &[usize]) -> Result<f64> {
    Ok(-proportions(counts)?
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>())
}

/// Size-weighted mean of child impurities.
pub fn weighted_impurity(children: &[(usize, f64)]) -> f64 {
    let total: usize = children.iter().map(|c| c.0).sum();
    if total == 0 {
        return 0.0;
    }
    children
        .iter()
        .map(|&(n, g)| n as f64 / total as f64 * g)
        .sum()
}
