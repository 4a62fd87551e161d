//! Per-feature data quality grid.
//!
//! Only two criteria are computed from the data: completeness (from the
//! missing fraction) and consistency (from the pass rate of row-level
//! statements touching the feature). Every other cell is copied from the
//! declared grid. When a declared grade disagrees with a computed one the
//! computed grade wins and the disagreement is listed in `divergences`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::eval::{Status, ViolationReport};
use crate::tabular::{Dataset, FeatureRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    #[serde(rename = "--")]
    MinusMinus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "0")]
    Neutral,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "++")]
    PlusPlus,
}

impl Grade {
    pub fn symbol(self) -> &'static str {
        match self {
            Grade::MinusMinus => "--",
            Grade::Minus => "-",
            Grade::Neutral => "0",
            Grade::Plus => "+",
            Grade::PlusPlus => "++",
        }
    }

    /// 0 → `++`, up to 5% → `+`, up to 30% → `-`, beyond → `--`.
    pub fn from_missing_fraction(frac: f64) -> Self {
        if frac <= 0.0 {
            Grade::PlusPlus
        } else if frac <= 0.05 {
            Grade::Plus
        } else if frac <= 0.30 {
            Grade::Minus
        } else {
            Grade::MinusMinus
        }
    }

    pub fn from_pass_rate(rate: f64) -> Self {
        if rate >= 1.0 {
            Grade::PlusPlus
        } else if rate >= 0.75 {
            Grade::Plus
        } else if rate >= 0.5 {
            Grade::Neutral
        } else if rate >= 0.25 {
            Grade::Minus
        } else {
            Grade::MinusMinus
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CriterionGroup {
    Accuracy,
    Relevancy,
    Representation,
    Accessibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    Believability,
    Accuracy,
    Objectivity,
    Completeness,
    Traceability,
    Reputation,
    Variety,
    #[serde(rename = "Value-added")]
    ValueAdded,
    Relevancy,
    Timeliness,
    #[serde(rename = "Ease of operation")]
    EaseOfOperation,
    #[serde(rename = "Appropriate amount of data")]
    AppropriateAmountOfData,
    Flexibility,
    Interpretability,
    #[serde(rename = "Ease of understanding")]
    EaseOfUnderstanding,
    Consistency,
    Conciseness,
    Accessibility,
    #[serde(rename = "Cost-effectiveness")]
    CostEffectiveness,
    #[serde(rename = "Access security")]
    AccessSecurity,
}

impl Criterion {
    pub const ALL: [Criterion; 20] = [
        Criterion::Believability,
        Criterion::Accuracy,
        Criterion::Objectivity,
        Criterion::Completeness,
        Criterion::Traceability,
        Criterion::Reputation,
        Criterion::Variety,
        Criterion::ValueAdded,
        Criterion::Relevancy,
        Criterion::Timeliness,
        Criterion::EaseOfOperation,
        Criterion::AppropriateAmountOfData,
        Criterion::Flexibility,
        Criterion::Interpretability,
        Criterion::EaseOfUnderstanding,
        Criterion::Consistency,
        Criterion::Conciseness,
        Criterion::Accessibility,
        Criterion::CostEffectiveness,
        Criterion::AccessSecurity,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Believability => "Believability",
            Criterion::Accuracy => "Accuracy",
            Criterion::Objectivity => "Objectivity",
            Criterion::Completeness => "Completeness",
            Criterion::Traceability => "Traceability",
            Criterion::Reputation => "Reputation",
            Criterion::Variety => "Variety",
            Criterion::ValueAdded => "Value-added",
            Criterion::Relevancy => "Relevancy",
            Criterion::Timeliness => "Timeliness",
            Criterion::EaseOfOperation => "Ease of operation",
            Criterion::AppropriateAmountOfData => "Appropriate amount of data",
            Criterion::Flexibility => "Flexibility",
            Criterion::Interpretability => "Interpretability",
            Criterion::EaseOfUnderstanding => "Ease of understanding",
            Criterion::Consistency => "Consistency",
            Criterion::Conciseness => "Conciseness",
            Criterion::Accessibility => "Accessibility",
            Criterion::CostEffectiveness => "Cost-effectiveness",
            Criterion::AccessSecurity => "Access security",
        }
    }

    pub fn group(self) -> CriterionGroup {
        use Criterion::*;
        match self {
            Believability | Accuracy | Objectivity | Completeness | Traceability | Reputation | Variety => {
                CriterionGroup::Accuracy
            }
            ValueAdded | Relevancy | Timeliness | EaseOfOperation | AppropriateAmountOfData | Flexibility => {
                CriterionGroup::Relevancy
            }
            Interpretability | EaseOfUnderstanding | Consistency | Conciseness => CriterionGroup::Representation,
            Accessibility | CostEffectiveness | AccessSecurity => CriterionGroup::Accessibility,
        }
    }

    pub fn is_computed(self) -> bool {
        matches!(self, Criterion::Completeness | Criterion::Consistency)
    }
}

/// Declared grades: feature → criterion → grade.
pub type DeclaredGrid = BTreeMap<String, BTreeMap<Criterion, Grade>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Computed,
    Declared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCell {
    pub grade: Grade,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorecardRow {
    pub group: CriterionGroup,
    pub criterion: Criterion,
    /// One entry per feature in `QualityScorecard::features`; `None` = not assessed.
    pub cells: Vec<Option<ScoreCell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub feature: String,
    pub criterion: Criterion,
    pub computed: Grade,
    pub declared: Grade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScorecard {
    pub features: Vec<String>,
    pub rows: Vec<ScorecardRow>,
    pub divergences: Vec<Divergence>,
    /// Declared entries naming features absent from the dataset.
    pub ignored_declarations: Vec<String>,
}

impl QualityScorecard {
    pub fn cell(&self, feature: &str, criterion: Criterion) -> Option<&ScoreCell> {
        let col = self.features.iter().position(|f| f == feature)?;
        self.rows
            .iter()
            .find(|r| r.criterion == criterion)
            .and_then(|r| r.cells[col].as_ref())
    }
}

/// Builds the grid over the dataset's `input` features.
pub fn quality_scorecard(data: &Dataset, report: &ViolationReport, declared: &DeclaredGrid) -> QualityScorecard {
    let features: Vec<String> = data
        .features()
        .iter()
        .filter(|f| f.role == FeatureRole::Input)
        .map(|f| f.name.clone())
        .collect();
    let mut divergences = Vec::new();
    let rows = Criterion::ALL
        .iter()
        .map(|&criterion| {
            let cells = features
                .iter()
                .map(|feature| {
                    let declared_grade = declared.get(feature).and_then(|m| m.get(&criterion)).copied();
                    let computed = match criterion {
                        Criterion::Completeness => {
                            let frac = data.missing_fraction(feature).unwrap_or(0.0);
                            Some((
                                Grade::from_missing_fraction(frac),
                                format!("{:.2}% missing", frac * 100.0),
                            ))
                        }
                        Criterion::Consistency => consistency(feature, report),
                        _ => None,
                    };
                    match (computed, declared_grade) {
                        (Some((grade, basis)), declared_grade) => {
                            if let Some(d) = declared_grade.filter(|d| *d != grade) {
                                divergences.push(Divergence {
                                    feature: feature.clone(),
                                    criterion,
                                    computed: grade,
                                    declared: d,
                                });
                            }
                            Some(ScoreCell {
                                grade,
                                provenance: Provenance::Computed,
                                basis: Some(basis),
                            })
                        }
                        (None, Some(grade)) => Some(ScoreCell {
                            grade,
                            provenance: Provenance::Declared,
                            basis: None,
                        }),
                        (None, None) => None,
                    }
                })
                .collect();
            ScorecardRow {
                group: criterion.group(),
                criterion,
                cells,
            }
        })
        .collect();
    let ignored_declarations = declared
        .keys()
        .filter(|k| !features.contains(k))
        .cloned()
        .collect();
    QualityScorecard {
        features,
        rows,
        divergences,
        ignored_declarations,
    }
}

/// Share of row-level statements on `feature` that did not fail; `None` without any.
fn consistency(feature: &str, report: &ViolationReport) -> Option<(Grade, String)> {
    let relevant: Vec<_> = report
        .statements
        .iter()
        .filter(|s| s.kind.is_row_check() && s.features.iter().any(|f| f == feature))
        .collect();
    if relevant.is_empty() {
        return None;
    }
    let passed = relevant.iter().filter(|s| s.status != Status::Fail).count();
    let rate = passed as f64 / relevant.len() as f64;
    Some((
        Grade::from_pass_rate(rate),
        format!("{passed}/{} row-level statements hold", relevant.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{evaluate, parse};

    #[test]
    fn completeness_thresholds() {
        assert_eq!(Grade::from_missing_fraction(0.0), Grade::PlusPlus);
        assert_eq!(Grade::from_missing_fraction(0.0456), Grade::Plus);
        assert_eq!(Grade::from_missing_fraction(0.20), Grade::Minus);
        assert_eq!(Grade::from_missing_fraction(0.2956), Grade::Minus);
        assert_eq!(Grade::from_missing_fraction(0.487), Grade::MinusMinus);
    }

    #[test]
    fn computed_cells_override_declared_and_record_divergence() {
        let d = Dataset::from_numeric(&[("a", &[1.0, f64::NAN, 3.0, 4.0, 5.0]), ("b", &[1.0, 2.0, 3.0, 4.0, 5.0])])
            .unwrap();
        let doc = parse("range a: > 2\nrule r: b > 0").unwrap();
        let report = evaluate(&doc, &d).unwrap();
        let mut declared = DeclaredGrid::new();
        declared
            .entry("a".into())
            .or_default()
            .insert(Criterion::Completeness, Grade::PlusPlus);
        declared
            .entry("b".into())
            .or_default()
            .insert(Criterion::Believability, Grade::Neutral);
        declared.entry("ghost".into()).or_default();

        let card = quality_scorecard(&d, &report, &declared);
        let a = card.cell("a", Criterion::Completeness).unwrap();
        assert_eq!((a.grade, a.provenance), (Grade::Minus, Provenance::Computed));
        assert_eq!(card.cell("a", Criterion::Consistency).unwrap().grade, Grade::MinusMinus);
        assert_eq!(card.cell("b", Criterion::Consistency).unwrap().grade, Grade::PlusPlus);
        assert_eq!(card.cell("b", Criterion::Believability).unwrap().provenance, Provenance::Declared);
        assert!(card.cell("a", Criterion::Believability).is_none());
        assert_eq!(card.divergences.len(), 1);
        assert_eq!(card.ignored_declarations, vec!["ghost".to_string()]);
    }

    #[test]
    fn criterion_labels_round_trip_through_serde() {
        for c in Criterion::ALL {
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.label()));
            assert_eq!(serde_json::from_str::<Criterion>(&json).unwrap(), c);
        }
    }
}
