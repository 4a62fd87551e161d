//! Classification and regression metrics. Degenerate denominators yield `None`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::loss::PROB_EPS;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Class 1 is positive.
pub fn confusion(y_true: &[f64], y_pred: &[f64]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("confusion matrix of no predictions".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if ![0.0, 1.0].contains(&t) || ![0.0, 1.0].contains(&p) {
            return Err(Error::InvalidArgument("confusion matrix needs 0/1 labels".into()));
        }
        match (t == 1.0, p == 1.0) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sensitivity,
    Specificity,
    Precision,
    Recall,
    F1,
    Accuracy,
    Auc,
    R2,
    Mse,
    Mae,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Precision,
        Metric::Recall,
        Metric::F1,
        Metric::Accuracy,
        Metric::Auc,
        Metric::R2,
        Metric::Mse,
        Metric::Mae,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::Accuracy => "accuracy",
            Metric::Auc => "auc",
            Metric::R2 => "r2",
            Metric::Mse => "mse",
            Metric::Mae => "mae",
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Mse | Metric::Mae)
    }

    /// Whether `v` is a value the metric can take.
    pub fn in_range(self, v: f64) -> bool {
        match self {
            Metric::R2 => v <= 1.0,
            Metric::Mse | Metric::Mae => v >= 0.0,
            _ => (0.0..=1.0).contains(&v),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub r2: Option<f64>,
    pub mse: Option<f64>,
    pub mae: Option<f64>,
}

impl MetricSet {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Sensitivity => self.sensitivity,
            Metric::Specificity => self.specificity,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
            Metric::Accuracy => self.accuracy,
            Metric::Auc => self.auc,
            Metric::R2 => self.r2,
            Metric::Mse => self.mse,
            Metric::Mae => self.mae,
        }
    }

    pub fn set(&mut self, m: Metric, v: Option<f64>) {
        let slot = match m {
            Metric::Sensitivity => &mut self.sensitivity,
            Metric::Specificity => &mut self.specificity,
            Metric::Precision => &mut self.precision,
            Metric::Recall => &mut self.recall,
            Metric::F1 => &mut self.f1,
            Metric::Accuracy => &mut self.accuracy,
            Metric::Auc => &mut self.auc,
            Metric::R2 => &mut self.r2,
            Metric::Mse => &mut self.mse,
            Metric::Mae => &mut self.mae,
        };
        *slot = v;
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classification_metrics(cm: &ConfusionMatrix) -> MetricSet {
    let sensitivity = ratio(cm.tp, cm.tp + cm.fn_);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let f1 = match (precision, sensitivity) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    MetricSet {
        sensitivity,
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        precision,
        recall: sensitivity,
        f1,
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        ..MetricSet::default()
    }
}

/// Area under the ROC curve via the rank-sum statistic, averaging ranks over ties.
pub fn auc(y_true: &[f64], scores: &[f64]) -> Option<f64> {
    let n_pos = y_true.iter().filter(|&&y| y == 1.0).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 || scores.len() != y_true.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    let pos_rank_sum: f64 = y_true.iter().zip(&ranks).filter(|(y, _)| **y == 1.0).map(|(_, r)| r).sum();
    let (p, n) = (n_pos as f64, n_neg as f64);
    Some((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Confusion-matrix metrics plus AUC when scores are available.
pub fn score_classifier(y_true: &[f64], y_pred: &[f64], scores: Option<&[f64]>) -> Result<MetricSet> {
    let mut m = classification_metrics(&confusion(y_true, y_pred)?);
    m.auc = scores.and_then(|s| auc(y_true, s));
    Ok(m)
}

/// `1 − SSR/SST`.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.len() < 2 {
        return Err(Error::InvalidArgument("r2 needs two or more paired values".into()));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let sst: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::InvalidArgument("r2 undefined for a constant target".into()));
    }
    let ssr: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(1.0 - ssr / sst)
}

pub fn score_regressor(y_true: &[f64], y_pred: &[f64]) -> Result<MetricSet> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(Error::InvalidArgument("regression metrics need paired, non-empty values".into()));
    }
    let n = y_true.len() as f64;
    Ok(MetricSet {
        r2: r2(y_true, y_pred).ok(),
        mse: Some(y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum::<f64>() / n),
        mae: Some(y_true.iter().zip(y_pred).map(|(y, p)| (y - p).abs()).sum::<f64>() / n),
        ..MetricSet::default()
    })
}

/// Cross entropy `H(p,q) = −Σ p ln q` and divergence `KL(p‖q) = Σ p ln(p/q)`.
pub fn cross_entropy_kl(p: &[f64], q: &[f64]) -> Result<(f64, f64)> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::InvalidArgument("distributions must have the same, non-zero length".into()));
    }
    for (name, d) in [("p", p), ("q", q)] {
        if d.iter().any(|v| !(*v >= 0.0)) || (d.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("{name} is not a probability distribution")));
        }
    }
    let (mut h, mut kl) = (0.0, 0.0);
    for (&pk, &qk) in p.iter().zip(q) {
        if pk > 0.0 {
            let qk = qk.max(PROB_EPS);
            h -= pk * qk.ln();
            kl += pk * (pk / qk).ln();
        }
    }
    Ok((h, kl))
}

/// Shannon entropy `−Σ p ln p`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// Mean and sample standard deviation of each metric over the runs where it is defined.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: MetricSet,
    pub std: MetricSet,
    pub runs: usize,
}

pub fn summarize(runs: &[MetricSet]) -> MetricSummary {
    let mut out = MetricSummary {
        runs: runs.len(),
        ..Default::default()
    };
    for m in Metric::ALL {
        let vals: Vec<f64> = runs.iter().filter_map(|r| r.get(m)).collect();
        if vals.is_empty() {
            continue;
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let std = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        out.mean.set(m, Some(mean));
        out.std.set(m, Some(std));
    }
    out
}
