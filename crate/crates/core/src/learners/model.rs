//! Model specifications, fitted models, and their persisted form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adaboost::{fit_adaboost, AdaBoostModel, AdaBoostParams};
use super::gbm::{fit_gbm, GbmModel, GbmParams, GbmTask};
use super::gd::GDConfig;
use super::kmeans::{kmeans, KmeansModel, KmeansParams};
use super::knn::{fit_knn, KnnModel, KnnParams};
use super::linear::{fit_linear, fit_logistic, LinearModel, LogisticModel, LogisticParams};
use super::tree::{fit_cart, CartParams, Tree};
use crate::engineering::FittedRecipe;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tabular::Dataset;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A model family with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear(GDConfig),
    Logistic(LogisticParams),
    Cart(CartParams),
    Adaboost(AdaBoostParams),
    Gbm(GbmParams),
    Knn(KnnParams),
    Kmeans(KmeansParams),
}

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Linear(_) => "linear",
            ModelSpec::Logistic(_) => "logistic",
            ModelSpec::Cart(_) => "cart",
            ModelSpec::Adaboost(_) => "adaboost",
            ModelSpec::Gbm(_) => "gbm",
            ModelSpec::Knn(_) => "knn",
            ModelSpec::Kmeans(_) => "kmeans",
        }
    }

    /// Whether the model predicts a 0/1 class.
    pub fn is_classifier(&self) -> bool {
        match self {
            ModelSpec::Logistic(_) | ModelSpec::Adaboost(_) | ModelSpec::Knn(_) => true,
            ModelSpec::Cart(p) => p.impurity.is_classification(),
            ModelSpec::Gbm(p) => p.task == GbmTask::Binary,
            ModelSpec::Linear(_) | ModelSpec::Kmeans(_) => false,
        }
    }

    /// Boosting rounds, used to prefer smaller ensembles on ties.
    pub fn rounds(&self) -> usize {
        match self {
            ModelSpec::Adaboost(p) => p.rounds,
            ModelSpec::Gbm(p) => p.n_trees,
            _ => 0,
        }
    }

    /// Tree depth, used to prefer shallower trees on ties.
    pub fn depth(&self) -> usize {
        match self {
            ModelSpec::Cart(p) => p.max_depth,
            ModelSpec::Gbm(p) => p.max_depth,
            ModelSpec::Adaboost(_) => 1,
            _ => 0,
        }
    }

    pub fn fit(&self, x: &Matrix, y: &[f64]) -> Result<TrainedModel> {
        Ok(match self {
            ModelSpec::Linear(p) => TrainedModel::Linear {
                params: p.clone(),
                state: fit_linear(x, y, p)?,
            },
            ModelSpec::Logistic(p) => TrainedModel::Logistic {
                params: p.clone(),
                state: fit_logistic(x, y, p)?,
            },
            ModelSpec::Cart(p) => TrainedModel::Cart {
                params: p.clone(),
                state: fit_cart(x, y, p)?,
            },
            ModelSpec::Adaboost(p) => TrainedModel::Adaboost {
                params: p.clone(),
                state: fit_adaboost(x, y, p)?,
            },
            ModelSpec::Gbm(p) => TrainedModel::Gbm {
                params: p.clone(),
                state: fit_gbm(x, y, p)?,
            },
            ModelSpec::Knn(p) => TrainedModel::Knn {
                params: p.clone(),
                state: fit_knn(x, y, p)?,
            },
            ModelSpec::Kmeans(p) => TrainedModel::Kmeans {
                params: p.clone(),
                state: kmeans(x, p)?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Linear { params: GDConfig, state: LinearModel },
    Logistic { params: LogisticParams, state: LogisticModel },
    Cart { params: CartParams, state: Tree },
    Adaboost { params: AdaBoostParams, state: AdaBoostModel },
    Gbm { params: GbmParams, state: GbmModel },
    Knn { params: KnnParams, state: KnnModel },
    Kmeans { params: KmeansParams, state: KmeansModel },
}

impl TrainedModel {
    pub fn spec(&self) -> ModelSpec {
        match self {
            TrainedModel::Linear { params, .. } => ModelSpec::Linear(params.clone()),
            TrainedModel::Logistic { params, .. } => ModelSpec::Logistic(params.clone()),
            TrainedModel::Cart { params, .. } => ModelSpec::Cart(params.clone()),
            TrainedModel::Adaboost { params, .. } => ModelSpec::Adaboost(params.clone()),
            TrainedModel::Gbm { params, .. } => ModelSpec::Gbm(params.clone()),
            TrainedModel::Knn { params, .. } => ModelSpec::Knn(params.clone()),
            TrainedModel::Kmeans { params, .. } => ModelSpec::Kmeans(params.clone()),
        }
    }

    pub fn kind(&self) -> &'static str {
        self.spec().family()
    }

    pub fn n_features(&self) -> Option<usize> {
        match self {
            TrainedModel::Linear { state, .. } => Some(state.weights.len()),
            TrainedModel::Logistic { state, .. } => Some(state.weights.len()),
            TrainedModel::Cart { state, .. } => Some(state.n_features),
            TrainedModel::Knn { state, .. } => Some(state.rows.n_cols()),
            TrainedModel::Kmeans { state, .. } => Some(state.centroids.n_cols()),
            TrainedModel::Adaboost { .. } | TrainedModel::Gbm { .. } => None,
        }
    }

    /// Class labels for classifiers, values for regressors, cluster indices for k-means.
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        match self {
            TrainedModel::Linear { state, .. } => state.predict(x),
            TrainedModel::Logistic { state, .. } => state.predict(x),
            TrainedModel::Cart { state, .. } => state.predict(x),
            TrainedModel::Adaboost { state, .. } => state.predict(x),
            TrainedModel::Gbm { state, .. } => state.predict(x),
            TrainedModel::Knn { state, .. } => state.predict(x),
            TrainedModel::Kmeans { state, .. } => state.predict(x),
        }
    }

    /// Probability of class 1, when the model produces one.
    pub fn predict_proba(&self, x: &Matrix) -> Option<Vec<f64>> {
        match self {
            TrainedModel::Logistic { state, .. } => Some(state.predict_proba(x)),
            TrainedModel::Cart { state, .. } => x.rows().map(|r| state.proba_row(r)).collect(),
            TrainedModel::Adaboost { state, .. } => Some(state.predict_proba(x)),
            TrainedModel::Gbm { state, .. } => x.rows().map(|r| state.proba_row(r)).collect(),
            TrainedModel::Knn { state, .. } => Some(x.rows().map(|r| state.proba_row(r)).collect()),
            TrainedModel::Linear { .. } | TrainedModel::Kmeans { .. } => None,
        }
    }
}

/// A trained model plus everything needed to score raw rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub model: TrainedModel,
    pub input_features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub preprocessing: FittedRecipe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub prediction: Vec<f64>,
    pub probability: Option<Vec<f64>>,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, input_features: Vec<String>, target: Option<String>, preprocessing: FittedRecipe) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            model,
            input_features,
            target,
            preprocessing,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Model inputs absent from `data`.
    pub fn missing_inputs(&self, data: &Dataset) -> Vec<String> {
        self.input_features
            .iter()
            .filter(|f| !data.has_feature(f))
            .cloned()
            .collect()
    }

    /// Applies the stored preprocessing, then the model.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Predictions> {
        let prepared = self.preprocessing.apply(data)?;
        if let Some(missing) = self.missing_inputs(&prepared).into_iter().next() {
            return Err(Error::UnknownFeature(missing));
        }
        let x = prepared.to_matrix(&self.input_features)?;
        Ok(Predictions {
            prediction: self.model.predict(&x),
            probability: self.model.predict_proba(&x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_shape() {
        let s: ModelSpec = serde_json::from_str(r#"{"family": "knn", "k": 7}"#).unwrap();
        assert_eq!(s, ModelSpec::Knn(KnnParams { k: 7, ..Default::default() }));
        let s: ModelSpec = serde_json::from_str(r#"{"family": "logistic", "l2": 0.01, "threshold": 0.4}"#).unwrap();
        let ModelSpec::Logistic(p) = s else { panic!() };
        assert_eq!((p.gd.l2, p.threshold), (0.01, 0.4));
        assert!(serde_json::from_str::<ModelSpec>(r#"{"family": "cart", "depth": 3}"#).is_err());
    }

    #[test]
    fn document_round_trip_keeps_predictions() {
        let x = Matrix::from_rows(&[[0.1, 2.0], [0.7, -1.0], [0.3, 0.5], [0.9, 0.2], [0.2, 0.9], [0.8, -0.3]]).unwrap();
        let y = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let specs = [
            ModelSpec::Logistic(LogisticParams::default()),
            ModelSpec::Cart(CartParams::default()),
            ModelSpec::Adaboost(AdaBoostParams { rounds: 5, seed: 2, ..Default::default() }),
            ModelSpec::Gbm(GbmParams { n_trees: 5, ..Default::default() }),
            ModelSpec::Knn(KnnParams { k: 3, ..Default::default() }),
            ModelSpec::Kmeans(KmeansParams::default()),
            ModelSpec::Linear(GDConfig::default()),
        ];
        for spec in specs {
            let model = spec.fit(&x, &y).unwrap();
            let doc = ModelDocument::new(model, vec!["a".into(), "b".into()], None, FittedRecipe::default());
            let text = doc.to_json().unwrap();
            let back = ModelDocument::from_json(&text).unwrap();
            assert_eq!(back, doc, "{}", spec.family());
            assert_eq!(back.model.predict(&x), doc.model.predict(&x));
            let value: serde_json::Value = serde_json::from_str(&text).unwrap();
            for key in ["format_version", "kind", "params", "state", "input_features", "preprocessing"] {
                assert!(value.get(key).is_some(), "{key}");
            }
        }
    }
}
