//! Train/test loss across a capacity axis, to expose under- and overfitting.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{Metric, MetricSet};
use super::validation::{evaluate_document, fit_candidate, Candidate, EvalContext};
use crate::error::{Error, Result};
use crate::seeded_rng;
use crate::tabular::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub candidate: Candidate,
    /// Misclassification rate for classifiers, mean squared error otherwise.
    pub train_loss: f64,
    pub test_loss: f64,
}

fn loss_of(m: &MetricSet, classifier: bool) -> Result<f64> {
    let v = if classifier {
        m.get(Metric::Accuracy).map(|a| 1.0 - a)
    } else {
        m.get(Metric::Mse)
    };
    v.ok_or_else(|| Error::Model("loss undefined on this split".into()))
}

/// Fits each candidate, ordered by increasing capacity, on one seeded
/// train/test split holding out `test_fraction` of the rows.
pub fn fit_curve(
    d: &Dataset,
    candidates: &[Candidate],
    ctx: &EvalContext,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if candidates.len() < 2 {
        return Err(Error::InvalidArgument("a capacity curve needs at least two points".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) || d.n_rows() < 2 {
        return Err(Error::InvalidArgument("need 0 < test_fraction < 1 and at least two rows".into()));
    }
    let mut order: Vec<usize> = (0..d.n_rows()).collect();
    order.shuffle(&mut seeded_rng(seed));
    let n_test = ((d.n_rows() as f64 * test_fraction).round() as usize).clamp(1, d.n_rows() - 1);
    let test = d.select_rows(&order[..n_test]);
    let train = d.select_rows(&order[n_test..]);
    candidates
        .par_iter()
        .map(|c| {
            let doc = fit_candidate(&train, c, ctx.recipe, ctx.constraints)?;
            let classifier = c.spec.is_classifier();
            Ok(CurvePoint {
                candidate: c.clone(),
                train_loss: loss_of(&evaluate_document(&doc, &train)?, classifier)?,
                test_loss: loss_of(&evaluate_document(&doc, &test)?, classifier)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engineering::EngineeringRecipe;
    use crate::learners::{CartParams, Impurity, ModelSpec};
    use rand::Rng;

    #[test]
    fn depth_curve_on_noisy_polynomial() {
        let mut rng = seeded_rng(5);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v - v + rng.gen_range(-1.0..1.0)).collect();
        let d = Dataset::from_numeric(&[("x", &x), ("y", &y)]).unwrap().with_target("y").unwrap();
        let cands: Vec<Candidate> = (1..=12)
            .chain([200])
            .map(|depth| {
                Candidate::new(
                    ModelSpec::Cart(CartParams {
                        max_depth: depth,
                        impurity: Impurity::Squared,
                        ..Default::default()
                    }),
                    None,
                )
            })
            .collect();
        let recipe = EngineeringRecipe::default();
        let curve = fit_curve(&d, &cands, &EvalContext::new(&recipe, None), 0.3, 1).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].train_loss <= w[0].train_loss + 1e-12);
        }
        let last = curve.last().unwrap();
        assert!(last.train_loss < 1e-12);
        let min_test = curve.iter().map(|p| p.test_loss).fold(f64::INFINITY, f64::min);
        assert!(last.test_loss >= min_test);
    }
}
