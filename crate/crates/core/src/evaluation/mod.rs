//! Metrics, resampling, grid search, performance gates and capacity curves.

mod curve;
mod gates;
mod metrics;
mod search;
mod validation;

pub use curve::{fit_curve, CurvePoint};
pub use gates::{gate_check, Comparator, GateOutcome, GateReport, PerformanceGate, Severity, Verdict};
pub use metrics::{
    auc, classification_metrics, confusion, cross_entropy_kl, entropy, r2, score_classifier, score_regressor,
    summarize, ConfusionMatrix, Metric, MetricSet, MetricSummary,
};
pub use search::{expand_grids, grid_search, GridResult, LeaderboardEntry, ModelGrid, ScalingChoice};
pub use validation::{
    bootstrap_eval, bootstrap_sample, evaluate_document, fit_candidate, fold_assignment, kfold_cv, prepare,
    BootstrapResult, Candidate, CvResult, EvalContext, LeakageMode,
};
