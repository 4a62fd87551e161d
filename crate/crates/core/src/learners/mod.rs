//! From-scratch learning algorithms.

pub mod adaboost;
pub mod gbm;
pub mod gd;
pub mod kmeans;
pub mod knn;
pub mod linear;
pub mod loss;
pub mod model;
pub mod tree;

pub use adaboost::{fit_adaboost, AdaBoostModel, AdaBoostParams, ResampleScheme};
pub use gbm::{fit_gbm, GbmModel, GbmParams, GbmTask};
pub use gd::{gradient_descent, GDConfig, Objective};
pub use kmeans::{kmeans, KmeansModel, KmeansParams};
pub use knn::{fit_knn, KnnModel, KnnParams};
pub use linear::{fit_linear, fit_logistic, LinearModel, LogisticModel, LogisticParams};
pub use loss::{entropy_impurity, gini, loss, weighted_impurity, LossKind};
pub use model::{ModelDocument, ModelSpec, Predictions, TrainedModel};
pub use tree::{fit_cart, best_split, CartParams, Impurity, Tree};
