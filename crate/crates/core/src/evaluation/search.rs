//! Exhaustive hyperparameter grid search over cross-validated candidates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::metrics::Metric;
use super::validation::{kfold_cv, Candidate, CvResult, EvalContext};
use crate::engineering::ScaleMethod;
use crate::error::{Error, Result};
use crate::learners::ModelSpec;
use crate::tabular::Dataset;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingChoice {
    /// z-score for distance- and gradient-based families, nothing for trees.
    #[default]
    Auto,
    None,
    Minmax,
    Zscore,
}

impl ScalingChoice {
    pub fn resolve(self, family: &str) -> Option<ScaleMethod> {
        match self {
            ScalingChoice::Auto => matches!(family, "knn" | "logistic" | "linear" | "kmeans").then_some(ScaleMethod::Zscore),
            ScalingChoice::None => None,
            ScalingChoice::Minmax => Some(ScaleMethod::Minmax),
            ScalingChoice::Zscore => Some(ScaleMethod::Zscore),
        }
    }
}

/// One model family with fixed parameters and a lattice of varied ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelGrid {
    pub family: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    pub scaling: ScalingChoice,
}

const SEEDED_FAMILIES: [&str; 4] = ["linear", "logistic", "adaboost", "kmeans"];

/// Expands every grid into candidates: the cartesian product of its value
/// lists, keys in lexicographic order with the last key varying fastest.
/// `seed` fills the `seed` parameter of seeded families when it is not given.
pub fn expand_grids(grids: &[ModelGrid], seed: u64) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for g in grids {
        if let Some((key, _)) = g.grid.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::Config(format!("grid for `{}` lists no values for `{key}`", g.family)));
        }
        let keys: Vec<&String> = g.grid.keys().collect();
        let mut combos: Vec<Vec<&Value>> = vec![Vec::new()];
        for k in &keys {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    g.grid[*k].iter().map(move |v| {
                        let mut next = c.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        for combo in combos {
            let mut obj = g.params.clone();
            for (k, v) in keys.iter().zip(combo) {
                obj.insert((*k).clone(), v.clone());
            }
            if SEEDED_FAMILIES.contains(&g.family.as_str()) && !obj.contains_key("seed") {
                obj.insert("seed".into(), Value::from(seed));
            }
            let supplied: Vec<String> = obj.keys().cloned().collect();
            obj.insert("family".into(), Value::String(g.family.clone()));
            let spec: ModelSpec = serde_json::from_value(Value::Object(obj))
                .map_err(|e| Error::Config(format!("model `{}`: {e}", g.family)))?;
            let known = serde_json::to_value(&spec)?;
            if let Some(bad) = supplied.iter().find(|k| known.get(k.as_str()).is_none()) {
                return Err(Error::Config(format!("model `{}` has no parameter `{bad}`", g.family)));
            }
            out.push(Candidate::new(spec.clone(), g.scaling.resolve(spec.family())));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    /// Position in the expanded grid.
    pub index: usize,
    pub candidate: Candidate,
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv: Option<CvResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub metric: Metric,
    /// Best first; candidates that failed or have an undefined score come last.
    pub leaderboard: Vec<LeaderboardEntry>,
}

impl GridResult {
    pub fn best(&self) -> Option<&LeaderboardEntry> {
        self.leaderboard.first().filter(|e| e.score.is_some())
    }
}

/// Cross-validates every candidate and ranks them by the mean of `metric`.
/// Ties prefer fewer boosting rounds, then shallower trees, then grid order.
pub fn grid_search(
    d: &Dataset,
    candidates: &[Candidate],
    metric: Metric,
    ctx: &EvalContext,
    k: usize,
    seed: u64,
) -> Result<GridResult> {
    if candidates.is_empty() {
        return Err(Error::Config("model grid is empty".into()));
    }
    let mut leaderboard: Vec<LeaderboardEntry> = candidates
        .par_iter()
        .enumerate()
        .map(|(index, c)| match kfold_cv(d, c, ctx, k, seed) {
            Ok(cv) => LeaderboardEntry {
                index,
                candidate: c.clone(),
                score: cv.summary.mean.get(metric),
                cv: Some(cv),
                error: None,
            },
            Err(e) => LeaderboardEntry {
                index,
                candidate: c.clone(),
                score: None,
                cv: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let oriented = |s: Option<f64>| s.map(|v| if metric.higher_is_better() { v } else { -v });
    leaderboard.sort_by(|a, b| {
        let by_score = match (oriented(a.score), oriented(b.score)) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        by_score
            .then(a.candidate.spec.rounds().cmp(&b.candidate.spec.rounds()))
            .then(a.candidate.spec.depth().cmp(&b.candidate.spec.depth()))
            .then(a.index.cmp(&b.index))
    });
    Ok(GridResult { metric, leaderboard })
}
