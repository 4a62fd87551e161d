//! Resampling estimates: k-fold cross-validation and the out-of-bag bootstrap.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{score_classifier, score_regressor, summarize, MetricSet, MetricSummary};
use crate::constraints::ConstraintDoc;
use crate::engineering::{EngineeringRecipe, FittedRecipe, FittedStep, ScaleMethod, ScaleParams};
use crate::error::{Error, Result};
use crate::learners::{ModelDocument, ModelSpec};
use crate::seeded_rng;
use crate::tabular::{Dataset, FeatureKind};

/// A model specification plus the input scaling fitted alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScaleMethod>,
}

impl Candidate {
    pub fn new(spec: ModelSpec, scaling: Option<ScaleMethod>) -> Self {
        Self { spec, scaling }
    }
}

/// Where preprocessing statistics are fitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Re-fitted on the training part of every resample.
    #[default]
    PerFold,
    /// Fitted once on the whole dataset before resampling.
    Global,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub recipe: &'a EngineeringRecipe,
    pub constraints: Option<&'a ConstraintDoc>,
    pub leakage: LeakageMode,
}

impl<'a> EvalContext<'a> {
    pub fn new(recipe: &'a EngineeringRecipe, constraints: Option<&'a ConstraintDoc>) -> Self {
        Self {
            recipe,
            constraints,
            leakage: LeakageMode::PerFold,
        }
    }
}

fn target_of(d: &Dataset) -> Result<String> {
    d.target_name()
        .map(str::to_owned)
        .ok_or_else(|| Error::Config("dataset has no target feature".into()))
}

/// Fits the recipe and, if requested, scaling of the numeric model inputs.
/// Returns the fitted steps, the transformed data and the model inputs.
pub fn prepare(
    train: &Dataset,
    scaling: Option<ScaleMethod>,
    recipe: &EngineeringRecipe,
    constraints: Option<&ConstraintDoc>,
) -> Result<(FittedRecipe, Dataset, Vec<String>)> {
    let (mut fitted, mut engineered) = recipe.fit(train, constraints)?;
    let inputs = engineered.model_inputs();
    if let Some(method) = scaling {
        let numeric: Vec<String> = inputs
            .iter()
            .filter(|f| engineered.meta(f).is_ok_and(|m| m.kind == FeatureKind::Numeric))
            .cloned()
            .collect();
        if !numeric.is_empty() {
            let params = ScaleParams::fit(&engineered, &numeric, method)?;
            engineered = params.apply(&engineered)?;
            fitted = fitted.then(FittedStep::Scale(params));
        }
    }
    Ok((fitted, engineered, inputs))
}

/// Fits preprocessing and the model on `train`.
pub fn fit_candidate(
    train: &Dataset,
    candidate: &Candidate,
    recipe: &EngineeringRecipe,
    constraints: Option<&ConstraintDoc>,
) -> Result<ModelDocument> {
    let target = target_of(train)?;
    let (fitted, engineered, inputs) = prepare(train, candidate.scaling, recipe, constraints)?;
    let x = engineered.to_matrix(&inputs)?;
    let y = engineered.target_vector(&target)?;
    let model = candidate.spec.fit(&x, &y)?;
    Ok(ModelDocument::new(model, inputs, Some(target), fitted))
}

/// Scores a fitted document on held-out rows.
pub fn evaluate_document(doc: &ModelDocument, test: &Dataset) -> Result<MetricSet> {
    let target = doc
        .target
        .as_deref()
        .ok_or_else(|| Error::Model("model has no target to evaluate against".into()))?;
    let y = test.target_vector(target)?;
    let p = doc.predict_dataset(test)?;
    if doc.model.spec().is_classifier() {
        score_classifier(&y, &p.prediction, p.probability.as_deref())
    } else {
        score_regressor(&y, &p.prediction)
    }
}

/// Seeded partition of `0..n` into `k` folds whose sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("{k} folds but only {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<MetricSet>,
    pub summary: MetricSummary,
    pub leakage: LeakageMode,
}

/// In global mode the recipe and scaling are fitted once on `d`; returns the
/// engineered data plus the context and candidate to use per fold.
fn globalize<'a>(
    d: &Dataset,
    candidate: &Candidate,
    ctx: &EvalContext<'a>,
    empty: &'a EngineeringRecipe,
) -> Result<(Dataset, Candidate, EvalContext<'a>)> {
    let (_, engineered, _) = prepare(d, candidate.scaling, ctx.recipe, ctx.constraints)?;
    let per_fold = EvalContext {
        recipe: empty,
        constraints: None,
        leakage: LeakageMode::Global,
    };
    Ok((engineered, Candidate::new(candidate.spec.clone(), None), per_fold))
}

pub fn kfold_cv(d: &Dataset, candidate: &Candidate, ctx: &EvalContext, k: usize, seed: u64) -> Result<CvResult> {
    let folds = fold_assignment(d.n_rows(), k, seed)?;
    let empty = EngineeringRecipe::default();
    let (data, candidate, ctx) = match ctx.leakage {
        LeakageMode::PerFold => (d.clone(), candidate.clone(), *ctx),
        LeakageMode::Global => globalize(d, candidate, ctx, &empty)?,
    };
    let results: Vec<MetricSet> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let doc = fit_candidate(&data.select_rows(&train_idx), &candidate, ctx.recipe, ctx.constraints)?;
            evaluate_document(&doc, &data.select_rows(&folds[f]))
        })
        .collect::<Result<_>>()?;
    Ok(CvResult {
        summary: summarize(&results),
        folds: results,
        leakage: ctx.leakage,
    })
}

/// `n` row indices drawn uniformly with replacement.
pub fn bootstrap_sample(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub runs: Vec<MetricSet>,
    pub summary: MetricSummary,
    /// Iterations dropped because every row was drawn.
    pub skipped: usize,
    /// Share of distinct rows in each evaluated resample.
    pub unique_fractions: Vec<f64>,
}

/// Trains on `b` seeded resamples and scores each on its out-of-bag rows.
pub fn bootstrap_eval(d: &Dataset, candidate: &Candidate, ctx: &EvalContext, b: usize, seed: u64) -> Result<BootstrapResult> {
    if b == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one iteration".into()));
    }
    let n = d.n_rows();
    if n == 0 {
        return Err(Error::InvalidArgument("bootstrap of an empty dataset".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut draws = Vec::with_capacity(b);
    let mut skipped = 0;
    for _ in 0..b {
        let sample = bootstrap_sample(n, &mut rng);
        let mut seen = vec![false; n];
        sample.iter().for_each(|&i| seen[i] = true);
        let oob: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
        if oob.is_empty() {
            skipped += 1;
        } else {
            let unique = (n - oob.len()) as f64 / n as f64;
            draws.push((sample, oob, unique));
        }
    }
    let runs: Vec<MetricSet> = draws
        .par_iter()
        .map(|(sample, oob, _)| {
            let doc = fit_candidate(&d.select_rows(sample), candidate, ctx.recipe, ctx.constraints)?;
            evaluate_document(&doc, &d.select_rows(oob))
        })
        .collect::<Result<_>>()?;
    Ok(BootstrapResult {
        summary: summarize(&runs),
        runs,
        skipped,
        unique_fractions: draws.iter().map(|d| d.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{CartParams, KnnParams};

    fn toy(n: usize) -> Dataset {
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| f64::from(i >= n / 2)).collect();
        Dataset::from_numeric(&[("x", &x), ("y", &y)]).unwrap().with_target("y").unwrap()
    }

    #[test]
    fn folds_partition_rows() {
        let folds = fold_assignment(10, 3, 7).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![3, 3, 4]);
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(folds, fold_assignment(10, 3, 7).unwrap());
        assert!(fold_assignment(2, 3, 0).is_err());
        assert!(fold_assignment(5, 1, 0).is_err());
    }

    #[test]
    fn leave_one_out() {
        let d = toy(3);
        let cand = Candidate::new(ModelSpec::Knn(KnnParams { k: 1, ..Default::default() }), None);
        let recipe = EngineeringRecipe::default();
        let cv = kfold_cv(&d, &cand, &EvalContext::new(&recipe, None), 3, 1).unwrap();
        assert_eq!(cv.folds.len(), 3);
        assert!(cv.folds.iter().all(|m| m.accuracy.is_some()));
    }

    #[test]
    fn cv_is_deterministic_in_both_modes() {
        let d = toy(40);
        let cand = Candidate::new(ModelSpec::Cart(CartParams::default()), Some(ScaleMethod::Zscore));
        let recipe = EngineeringRecipe::default();
        for leakage in [LeakageMode::PerFold, LeakageMode::Global] {
            let ctx = EvalContext {
                leakage,
                ..EvalContext::new(&recipe, None)
            };
            let a = kfold_cv(&d, &cand, &ctx, 5, 3).unwrap();
            assert_eq!(a, kfold_cv(&d, &cand, &ctx, 5, 3).unwrap());
            assert_eq!(a.leakage, leakage);
            assert!(a.summary.mean.accuracy.unwrap() > 0.9);
        }
    }

    #[test]
    fn bootstrap_unique_share() {
        let mut rng = seeded_rng(11);
        let mean: f64 = (0..200)
            .map(|_| {
                let s = bootstrap_sample(500, &mut rng);
                let mut seen = vec![false; 500];
                s.iter().for_each(|&i| seen[i] = true);
                seen.iter().filter(|&&b| b).count() as f64 / 500.0
            })
            .sum::<f64>()
            / 200.0;
        assert!((mean - (1.0 - (-1f64).exp())).abs() < 0.02);
    }

    #[test]
    fn bootstrap_is_seeded() {
        let d = toy(30);
        let cand = Candidate::new(ModelSpec::Cart(CartParams::default()), None);
        let recipe = EngineeringRecipe::default();
        let ctx = EvalContext::new(&recipe, None);
        let a = bootstrap_eval(&d, &cand, &ctx, 4, 2).unwrap();
        assert_eq!(a, bootstrap_eval(&d, &cand, &ctx, 4, 2).unwrap());
        assert_eq!(a.runs.len() + a.skipped, 4);
        let single = bootstrap_eval(&d, &cand, &ctx, 1, 2).unwrap();
        assert_eq!(single.runs.len(), 1);
    }

    #[test]
    fn skips_iterations_without_out_of_bag_rows() {
        let d = toy(1).with_target("y").unwrap();
        let cand = Candidate::new(ModelSpec::Cart(CartParams::default()), None);
        let recipe = EngineeringRecipe::default();
        let r = bootstrap_eval(&d, &cand, &EvalContext::new(&recipe, None), 3, 0).unwrap();
        assert_eq!(r.skipped, 3);
        assert!(r.runs.is_empty());
    }
}
