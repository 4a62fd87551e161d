//! Thresholded metric requirements.

use serde::{Deserialize, Serialize};

use super::metrics::{Metric, MetricSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
}

impl Comparator {
    pub fn holds(self, observed: f64, threshold: f64) -> bool {
        match self {
            Comparator::Ge => observed >= threshold,
            Comparator::Gt => observed > threshold,
            Comparator::Le => observed <= threshold,
            Comparator::Lt => observed < threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
            Comparator::Le => "<=",
            Comparator::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    #[default]
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceGate {
    pub metric: Metric,
    pub comparator: Comparator,
    pub threshold: f64,
    #[serde(default)]
    pub severity: Severity,
}

impl PerformanceGate {
    pub fn new(metric: Metric, comparator: Comparator, threshold: f64, severity: Severity) -> Result<Self> {
        let g = Self {
            metric,
            comparator,
            threshold,
            severity,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_finite() && self.metric.in_range(self.threshold) {
            Ok(())
        } else {
            Err(Error::Config(format!("gate threshold {} is outside the range of {}", self.threshold, self.metric)))
        }
    }
}

impl std::fmt::Display for PerformanceGate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Hard => "hard",
            Severity::Soft => "soft",
        };
        write!(f, "{} {} {} ({sev})", self.metric, self.comparator.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub gate: PerformanceGate,
    /// `None` when the metric is undefined, which violates the gate.
    pub observed: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    PassWithWarnings,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub verdict: Verdict,
    pub outcomes: Vec<GateOutcome>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Violated hard gates.
    pub fn violations(&self) -> Vec<&PerformanceGate> {
        self.violated(Severity::Hard)
    }

    /// Violated soft gates.
    pub fn warnings(&self) -> Vec<&PerformanceGate> {
        self.violated(Severity::Soft)
    }

    fn violated(&self, severity: Severity) -> Vec<&PerformanceGate> {
        self.outcomes
            .iter()
            .filter(|o| !o.passed && o.gate.severity == severity)
            .map(|o| &o.gate)
            .collect()
    }
}

pub fn gate_check(metrics: &MetricSet, gates: &[PerformanceGate]) -> GateReport {
    let outcomes: Vec<GateOutcome> = gates
        .iter()
        .map(|g| {
            let observed = metrics.get(g.metric);
            GateOutcome {
                gate: g.clone(),
                observed,
                passed: observed.is_some_and(|v| g.comparator.holds(v, g.threshold)),
            }
        })
        .collect();
    let failed = |s: Severity| outcomes.iter().any(|o| !o.passed && o.gate.severity == s);
    let verdict = if failed(Severity::Hard) {
        Verdict::Fail
    } else if failed(Severity::Soft) {
        Verdict::PassWithWarnings
    } else {
        Verdict::Pass
    };
    GateReport { verdict, outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gates() -> Vec<PerformanceGate> {
        vec![
            PerformanceGate::new(Metric::Sensitivity, Comparator::Ge, 0.78, Severity::Hard).unwrap(),
            PerformanceGate::new(Metric::Specificity, Comparator::Ge, 0.77, Severity::Soft).unwrap(),
        ]
    }

    fn metrics(sens: f64, spec: f64) -> MetricSet {
        MetricSet {
            sensitivity: Some(sens),
            specificity: Some(spec),
            ..Default::default()
        }
    }

    #[test]
    fn reference_thresholds() {
        assert_eq!(gate_check(&metrics(0.84, 0.77), &gates()).verdict, Verdict::Pass);
        let r = gate_check(&metrics(0.70, 0.90), &gates());
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.violations()[0].metric, Metric::Sensitivity);
        let r = gate_check(&metrics(0.80, 0.60), &gates());
        assert_eq!(r.verdict, Verdict::PassWithWarnings);
        assert_eq!(r.warnings().len(), 1);
    }

    #[test]
    fn comparator_semantics_and_undefined() {
        let g = [PerformanceGate::new(Metric::Accuracy, Comparator::Ge, 0.74, Severity::Hard).unwrap()];
        let m = MetricSet {
            accuracy: Some(0.70),
            ..Default::default()
        };
        let r = gate_check(&m, &g);
        assert!(!r.passed());
        assert!(r.violations()[0].to_string().contains("accuracy"));
        assert!(!gate_check(&MetricSet::default(), &g).passed());
        assert_eq!(gate_check(&m, &[]).verdict, Verdict::Pass);
    }

    #[test]
    fn threshold_range() {
        assert!(PerformanceGate::new(Metric::Accuracy, Comparator::Ge, 1.2, Severity::Hard).is_err());
        assert!(PerformanceGate::new(Metric::Mse, Comparator::Le, 3.0, Severity::Soft).is_ok());
        let g: PerformanceGate = serde_json::from_str(r#"{"metric": "sensitivity", "comparator": ">=", "threshold": 0.78}"#).unwrap();
        assert_eq!(g.severity, Severity::Hard);
    }
}
