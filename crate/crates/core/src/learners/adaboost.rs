//! AdaBoost over decision stumps with weight-proportional resampling.

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::linear::{check_binary, check_xy};
use super::tree::{best_split, Impurity};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::seeded_rng;

/// Round errors are clamped to `[ERROR_CLAMP, 1 − ERROR_CLAMP]` before computing α.
pub const ERROR_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaBoostParams {
    pub rounds: usize,
    pub seed: u64,
    pub scheme: ResampleScheme,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        Self {
            rounds: 50,
            seed: 0,
            scheme: ResampleScheme::Persistent,
        }
    }
}

/// What the boosting weights are attached to between rounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScheme {
    /// Weights live on the training rows and accumulate across rounds; each
    /// round's sample is drawn from the training rows and errors are measured
    /// against the weights.
    #[default]
    Persistent,
    /// Each round's sample is drawn from the previous sample and weights are
    /// reset to uniform on it. The working sample loses distinct rows quickly.
    ResetEachRound,
}

/// One-split classifier voting ±1. `feature == None` is a constant vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: f64,
    pub right: f64,
    pub alpha: f64,
    /// Unclamped weighted error on the sample the stump was fit to.
    pub error: f64,
    pub accepted: bool,
}

impl Stump {
    pub fn vote(&self, row: &[f64]) -> f64 {
        match self.feature {
            Some(f) if row[f] > self.threshold => self.right,
            _ => self.left,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<Stump>,
}

pub fn alpha_for_error(error: f64) -> f64 {
    let e = error.clamp(ERROR_CLAMP, 1.0 - ERROR_CLAMP);
    ((1.0 - e) / e).ln()
}

fn majority_sign(labels: impl Iterator<Item = usize>) -> f64 {
    let (mut neg, mut pos) = (0usize, 0usize);
    for l in labels {
        if l == 1 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    if pos > neg {
        1.0
    } else {
        -1.0
    }
}

fn fit_stump(x: &Matrix, y: &[f64], sample: &[usize]) -> Stump {
    let vote_of = |keep: &dyn Fn(usize) -> bool| {
        majority_sign(sample.iter().filter(|&&r| keep(r)).map(|&r| y[r] as usize))
    };
    let (feature, threshold, left, right) = match best_split(x, y, sample, Impurity::Gini, 2, 1) {
        Some(s) => (
            Some(s.feature),
            s.threshold,
            vote_of(&|r| x.get(r, s.feature) <= s.threshold),
            vote_of(&|r| x.get(r, s.feature) > s.threshold),
        ),
        None => {
            let c = vote_of(&|_| true);
            (None, 0.0, c, c)
        }
    };
    Stump {
        feature,
        threshold,
        left,
        right,
        alpha: 0.0,
        error: 0.0,
        accepted: false,
    }
}

/// Labels are 0/1 and vote as −1/+1.
///
/// Each round fits the lowest-Gini stump to the current sample, computes its
/// weighted error and `α`, multiplies the weights of misclassified rows by
/// `e^α` (after normalising they carry half the mass), and draws the next
/// sample of `n` rows with replacement in proportion to the weights. The first round uses the training rows as they
/// are. A stump whose error is not below 0.5 is kept for the record but does
/// not vote and leaves the weights unchanged.
pub fn fit_adaboost(x: &Matrix, y: &[f64], params: &AdaBoostParams) -> Result<AdaBoostModel> {
    check_xy(x, y)?;
    check_binary(y)?;
    let n = x.n_rows();
    let mut rng = seeded_rng(params.seed);
    let mut sample: Vec<usize> = (0..n).collect();
    let mut row_weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::with_capacity(params.rounds);
    let truth = |r: usize| if y[r] == 1.0 { 1.0 } else { -1.0 };
    for _ in 0..params.rounds {
        let mut stump = fit_stump(x, y, &sample);
        // Rows scored this round and their weights.
        let (rows, mut weights): (Vec<usize>, Vec<f64>) = match params.scheme {
            ResampleScheme::Persistent => ((0..n).collect(), row_weights.clone()),
            ResampleScheme::ResetEachRound => (sample.clone(), vec![1.0 / n as f64; n]),
        };
        let wrong: Vec<bool> = rows.iter().map(|&r| stump.vote(x.row(r)) != truth(r)).collect();
        let total: f64 = weights.iter().sum();
        stump.error = wrong.iter().zip(&weights).filter(|(b, _)| **b).map(|(_, w)| w).sum::<f64>() / total;
        stump.accepted = stump.error < 0.5;
        stump.alpha = alpha_for_error(stump.error);
        if stump.accepted {
            for (w, &bad) in weights.iter_mut().zip(&wrong) {
                if bad {
                    *w *= stump.alpha.exp();
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let dist = WeightedIndex::new(&weights).expect("weights are positive and finite");
        sample = (0..n).map(|_| rows[dist.sample(&mut rng)]).collect();
        if params.scheme == ResampleScheme::Persistent {
            row_weights = weights;
        }
        stumps.push(stump);
    }
    Ok(AdaBoostModel { stumps })
}

impl AdaBoostModel {
    /// `Σ α_m h_m(x)` over accepted stumps.
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.stumps
            .iter()
            .filter(|s| s.accepted)
            .map(|s| s.alpha * s.vote(row))
            .sum()
    }

    /// Margin rescaled from `[−Σα, Σα]` to `[0, 1]`.
    pub fn proba_row(&self, row: &[f64]) -> f64 {
        let total: f64 = self.stumps.iter().filter(|s| s.accepted).map(|s| s.alpha).sum();
        if total <= 0.0 {
            return 0.5;
        }
        (0.5 + 0.5 * self.margin(row) / total).clamp(0.0, 1.0)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        if self.margin(row) > 0.0 {
            1.0
        } else {
            0.0
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        x.rows().map(|r| self.proba_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_for_error(0.5), 0.0);
        assert!((alpha_for_error(0.1) - 9f64.ln()).abs() < 1e-12);
        assert!(alpha_for_error(0.0).is_finite());
        assert!(alpha_for_error(1.0).is_finite());
    }

    #[test]
    fn separable_data_first_round_is_perfect() {
        let xs: Vec<f64> = (0..12).map(f64::from).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v >= 6.0 { 1.0 } else { 0.0 }).collect();
        let x = Matrix::column_vector(&xs);
        let m = fit_adaboost(&x, &y, &AdaBoostParams { rounds: 5, seed: 1, ..Default::default() }).unwrap();
        assert_eq!(m.stumps[0].error, 0.0);
        assert!(m.stumps[0].alpha.is_finite());
        assert_eq!(m.predict(&x), y);
    }

    #[test]
    fn accepted_stumps_beat_chance() {
        let x = Matrix::from_rows(&[[1.0, 4.0], [2.0, 1.0], [3.0, 3.0], [4.0, 2.0], [5.0, 5.0], [6.0, 0.0]]).unwrap();
        let y = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let m = fit_adaboost(&x, &y, &AdaBoostParams { rounds: 20, seed: 3, ..Default::default() }).unwrap();
        assert_eq!(m.stumps.len(), 20);
        assert!(m.stumps.iter().filter(|s| s.accepted).all(|s| s.error < 0.5));
        assert!(m.predict_proba(&x).iter().all(|p| (0.0..=1.0).contains(p)));
        let literal = AdaBoostParams {
            rounds: 20,
            seed: 3,
            scheme: ResampleScheme::ResetEachRound,
        };
        let m = fit_adaboost(&x, &y, &literal).unwrap();
        assert!(m.stumps.iter().filter(|s| s.accepted).all(|s| s.error < 0.5));
    }

    #[test]
    fn seeded_fits_are_identical() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0], [5.0]]).unwrap();
        let y = [0.0, 1.0, 0.0, 1.0, 1.0];
        let p = AdaBoostParams { rounds: 10, seed: 9, ..Default::default() };
        assert_eq!(fit_adaboost(&x, &y, &p).unwrap(), fit_adaboost(&x, &y, &p).unwrap());
    }
}
