//! Data preparation: imputation, scaling, one-hot encoding, and recipes that
//! separate fitting statistics from applying them.
//!
//! A [`EngineeringRecipe`] is fitted on one dataset (for example the training
//! folds of a cross-validation split) and yields a [`FittedRecipe`] that replays
//! the same transforms, with the same statistics, on any other dataset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraints::{self, ConstraintDoc};
use crate::error::{Error, Result};
use crate::tabular::{quantile_sorted, Cell, Dataset, FeatureKind, FeatureMeta, FeatureRole};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeStrategy {
    Mean,
    Median,
    MostFrequent,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    Minmax,
    Zscore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecipeStep {
    MarkZeros {
        features: Vec<String>,
    },
    Impute {
        feature: String,
        strategy: ImputeStrategy,
    },
    Scale {
        features: Vec<String>,
        method: ScaleMethod,
    },
    OneHot {
        feature: String,
    },
    /// Materialises derive statements. Without inline `source` the caller's
    /// constraint document is used.
    DeriveFromConstraints {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EngineeringRecipe {
    pub steps: Vec<RecipeStep>,
}

impl EngineeringRecipe {
    pub fn new(steps: Vec<RecipeStep>) -> Self {
        Self { steps }
    }

    /// Fits every step in order on `data`, returning the fitted recipe and the transformed data.
    pub fn fit(&self, data: &Dataset, constraints: Option<&ConstraintDoc>) -> Result<(FittedRecipe, Dataset)> {
        let mut current = data.clone();
        let mut fitted = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let f = match step {
                RecipeStep::MarkZeros { features } => FittedStep::MarkZeros {
                    features: features.clone(),
                },
                RecipeStep::Impute { feature, strategy } => FittedStep::Impute {
                    feature: feature.clone(),
                    fill: fit_imputer(&current, feature, *strategy)?,
                },
                RecipeStep::Scale { features, method } => {
                    FittedStep::Scale(ScaleParams::fit(&current, features, *method)?)
                }
                RecipeStep::OneHot { feature } => FittedStep::OneHot {
                    feature: feature.clone(),
                    categories: categories(&current, feature)?,
                },
                RecipeStep::DeriveFromConstraints { source } => {
                    let doc = match (source, constraints) {
                        (Some(text), _) => constraints::parse(text)?,
                        (None, Some(doc)) => doc.clone(),
                        (None, None) => {
                            return Err(Error::Config(
                                "derive_from_constraints step has no constraint document".into(),
                            ))
                        }
                    };
                    FittedStep::Derive {
                        source: doc.derive_only().source_text,
                    }
                }
            };
            current = f.apply(&current)?;
            fitted.push(f);
        }
        Ok((FittedRecipe { steps: fitted }, current))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum FittedStep {
    MarkZeros { features: Vec<String> },
    Impute { feature: String, fill: Cell },
    Scale(ScaleParams),
    OneHot { feature: String, categories: Vec<String> },
    Derive { source: String },
}

impl FittedStep {
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        match self {
            FittedStep::MarkZeros { features } => data.mark_missing_zeros(features),
            FittedStep::Impute { feature, fill } => apply_fill(data, feature, fill),
            FittedStep::Scale(params) => params.apply(data),
            FittedStep::OneHot { feature, categories } => encode_one_hot(data, feature, categories),
            FittedStep::Derive { source } => constraints::derive_features(&constraints::parse(source)?, data),
        }
    }
}

/// Statistics captured by [`EngineeringRecipe::fit`], replayable on new data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedRecipe {
    pub steps: Vec<FittedStep>,
}

impl FittedRecipe {
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        self.steps.iter().try_fold(data.clone(), |d, s| s.apply(&d))
    }

    pub fn then(mut self, step: FittedStep) -> Self {
        self.steps.push(step);
        self
    }
}

/// Replaces every missing cell of `feature` using a statistic of the non-missing cells.
pub fn impute(data: &Dataset, feature: &str, strategy: ImputeStrategy) -> Result<Dataset> {
    let fill = fit_imputer(data, feature, strategy)?;
    apply_fill(data, feature, &fill)
}

fn fit_imputer(data: &Dataset, feature: &str, strategy: ImputeStrategy) -> Result<Cell> {
    let meta = data.meta(feature)?;
    let col = data.column(feature)?;
    let categorical = meta.kind == FeatureKind::Categorical;
    match strategy {
        ImputeStrategy::Constant(c) => Ok(if categorical {
            Cell::Cat(c.to_string())
        } else {
            Cell::Num(c)
        }),
        ImputeStrategy::MostFrequent => {
            let mut counts: BTreeMap<String, (usize, Cell)> = BTreeMap::new();
            for cell in col.iter().filter(|c| !c.is_missing()) {
                // Numeric keys are compared through their sortable bit pattern.
                let key = match cell {
                    Cell::Num(v) => format!("{:020}", sortable_bits(*v)),
                    other => other.to_string(),
                };
                counts.entry(key).or_insert((0, cell.clone())).0 += 1;
            }
            let mut best: Option<&(usize, Cell)> = None;
            for entry in counts.values() {
                if best.is_none_or(|b| entry.0 > b.0) {
                    best = Some(entry);
                }
            }
            best.map(|(_, c)| c.clone())
                .ok_or_else(|| Error::feature(feature, "cannot impute: every cell is missing"))
        }
        ImputeStrategy::Mean | ImputeStrategy::Median => {
            if categorical {
                return Err(Error::feature(feature, "mean/median imputation needs a numeric feature"));
            }
            let mut values: Vec<f64> = col.iter().filter_map(Cell::as_num).collect();
            if values.is_empty() {
                return Err(Error::feature(feature, "cannot impute: every cell is missing"));
            }
            let v = if strategy == ImputeStrategy::Mean {
                values.iter().sum::<f64>() / values.len() as f64
            } else {
                values.sort_by(f64::total_cmp);
                quantile_sorted(&values, 0.5)
            };
            Ok(Cell::Num(v))
        }
    }
}

fn sortable_bits(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn apply_fill(data: &Dataset, feature: &str, fill: &Cell) -> Result<Dataset> {
    let meta = data.meta(feature)?;
    let column: Vec<Cell> = data
        .column(feature)?
        .iter()
        .map(|c| if c.is_missing() { fill.clone() } else { c.clone() })
        .collect();
    // A non-0/1 fill demotes a binary column to numeric.
    let kind = match (meta.kind, fill) {
        (FeatureKind::Binary, Cell::Num(v)) if *v != 0.0 && *v != 1.0 => Some(FeatureKind::Numeric),
        _ => None,
    };
    data.with_column(feature, column, kind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledFeature {
    pub name: String,
    pub center: f64,
    pub scale: f64,
}

/// Fitted affine map `(x − center) / scale` per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub method: ScaleMethod,
    pub features: Vec<ScaledFeature>,
}

impl ScaleParams {
    pub fn fit(data: &Dataset, features: &[String], method: ScaleMethod) -> Result<Self> {
        let mut out = Vec::with_capacity(features.len());
        for name in features {
            let values = data
                .numeric_column(name)?
                .into_iter()
                .enumerate()
                .map(|(row, v)| v.ok_or_else(|| Error::feature(name, format!("cannot scale: missing value at row {row}"))))
                .collect::<Result<Vec<f64>>>()?;
            if values.is_empty() {
                return Err(Error::feature(name, "cannot scale an empty column"));
            }
            let (center, scale) = match method {
                ScaleMethod::Minmax => {
                    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if max == min {
                        return Err(Error::feature(name, "min-max scaling of a constant feature"));
                    }
                    (min, max - min)
                }
                ScaleMethod::Zscore => {
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let std = if values.len() < 2 {
                        0.0
                    } else {
                        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                    };
                    if std == 0.0 {
                        return Err(Error::feature(name, "z-score scaling with zero standard deviation"));
                    }
                    (mean, std)
                }
            };
            out.push(ScaledFeature {
                name: name.clone(),
                center,
                scale,
            });
        }
        Ok(Self { method, features: out })
    }

    pub fn apply_value(&self, feature: &str, value: f64) -> Option<f64> {
        self.features
            .iter()
            .find(|f| f.name == feature)
            .map(|f| (value - f.center) / f.scale)
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let mut out = data.clone();
        for f in &self.features {
            let column = data
                .column(&f.name)?
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => Ok(Cell::Num((v - f.center) / f.scale)),
                    Cell::Missing => Ok(Cell::Missing),
                    Cell::Cat(_) => Err(Error::feature(&f.name, "cannot scale a categorical feature")),
                })
                .collect::<Result<Vec<_>>>()?;
            out = out.with_column(&f.name, column, Some(FeatureKind::Numeric))?;
        }
        Ok(out)
    }
}

pub fn scale(data: &Dataset, features: &[String], method: ScaleMethod) -> Result<(Dataset, ScaleParams)> {
    let params = ScaleParams::fit(data, features, method)?;
    Ok((params.apply(data)?, params))
}

fn categories(data: &Dataset, feature: &str) -> Result<Vec<String>> {
    let mut cats: Vec<String> = data
        .column(feature)?
        .iter()
        .filter(|c| !c.is_missing())
        .map(Cell::to_string)
        .collect();
    cats.sort();
    cats.dedup();
    Ok(cats)
}

/// One binary column `feature=token` per distinct token, in lexicographic order.
/// The source feature is kept with role `excluded`.
pub fn one_hot(data: &Dataset, feature: &str) -> Result<Dataset> {
    let cats = categories(data, feature)?;
    encode_one_hot(data, feature, &cats)
}

fn encode_one_hot(data: &Dataset, feature: &str, categories: &[String]) -> Result<Dataset> {
    let source = data.column(feature)?.to_vec();
    let mut out = data.with_role(feature, FeatureRole::Excluded)?;
    for cat in categories {
        let column = source
            .iter()
            .map(|c| match c {
                Cell::Missing => Cell::Missing,
                other if other.to_string() == *cat => Cell::Num(1.0),
                _ => Cell::Num(0.0),
            })
            .collect();
        let meta = FeatureMeta::new(format!("{feature}={cat}"), FeatureKind::Binary).with_role(FeatureRole::Derived);
        out = out.with_appended(meta, column)?;
    }
    Ok(out)
}

/// Degree of kinship, mapped to the expected fraction of shared genes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kinship {
    ParentOrFullSibling,
    HalfSiblingGrandparentAuntUncle,
    HalfAuntHalfUncleCousin,
}

impl Kinship {
    pub fn shared_genes(self) -> f64 {
        match self {
            Kinship::ParentOrFullSibling => 0.5,
            Kinship::HalfSiblingGrandparentAuntUncle => 0.25,
            Kinship::HalfAuntHalfUncleCousin => 0.125,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiabetesHistory {
    Diabetic { age_at_diagnosis: f64 },
    NonDiabetic { age_at_last_exam: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeRecord {
    pub kinship: Kinship,
    pub history: DiabetesHistory,
}

impl RelativeRecord {
    pub fn new(kinship: Kinship, history: DiabetesHistory) -> Result<Self> {
        let age = match history {
            DiabetesHistory::Diabetic { age_at_diagnosis } => age_at_diagnosis,
            DiabetesHistory::NonDiabetic { age_at_last_exam } => age_at_last_exam,
        };
        if !(age > 0.0 && age < 122.0) {
            return Err(Error::InvalidArgument(format!("relative age {age} outside (0, 122)")));
        }
        Ok(Self { kinship, history })
    }

    pub fn diabetic(kinship: Kinship, age_at_diagnosis: f64) -> Result<Self> {
        Self::new(kinship, DiabetesHistory::Diabetic { age_at_diagnosis })
    }

    pub fn non_diabetic(kinship: Kinship, age_at_last_exam: f64) -> Result<Self> {
        Self::new(kinship, DiabetesHistory::NonDiabetic { age_at_last_exam })
    }
}

/// Diabetes pedigree function over a subject's relatives.
///
/// `(Σ_diabetic K(88 − age_at_diagnosis) + 20) / (Σ_non_diabetic K(age_at_last_exam − 14) + 50)`.
/// Non-diabetic relatives examined before 14 contribute negative terms; the
/// result is not clamped.
pub fn dpf(relatives: &[RelativeRecord]) -> f64 {
    let (mut num, mut den) = (20.0, 50.0);
    for r in relatives {
        let k = r.kinship.shared_genes();
        match r.history {
            DiabetesHistory::Diabetic { age_at_diagnosis } => num += k * (88.0 - age_at_diagnosis),
            DiabetesHistory::NonDiabetic { age_at_last_exam } => den += k * (age_at_last_exam - 14.0),
        }
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(d: &Dataset, name: &str) -> Vec<Cell> {
        d.column(name).unwrap().to_vec()
    }

    fn nums(values: &[f64]) -> Vec<Cell> {
        values.iter().map(|&v| Cell::Num(v)).collect()
    }

    #[test]
    fn mean_and_median_imputation() {
        let d = Dataset::from_numeric(&[("x", &[1.0, f64::NAN, 3.0])]).unwrap();
        assert_eq!(col(&impute(&d, "x", ImputeStrategy::Mean).unwrap(), "x"), nums(&[1.0, 2.0, 3.0]));
        let d = Dataset::from_numeric(&[("x", &[1.0, f64::NAN, 3.0, 100.0])]).unwrap();
        assert_eq!(col(&impute(&d, "x", ImputeStrategy::Median).unwrap(), "x")[1], Cell::Num(3.0));
    }

    #[test]
    fn most_frequent_and_constant() {
        let d = Dataset::from_numeric(&[("x", &[2.0, 2.0, 5.0, f64::NAN, 5.0, 1.0, 5.0])]).unwrap();
        assert_eq!(col(&impute(&d, "x", ImputeStrategy::MostFrequent).unwrap(), "x")[3], Cell::Num(5.0));
        assert_eq!(col(&impute(&d, "x", ImputeStrategy::Constant(-1.0)).unwrap(), "x")[3], Cell::Num(-1.0));
    }

    #[test]
    fn imputing_all_missing_errors() {
        let d = Dataset::from_numeric(&[("x", &[f64::NAN, f64::NAN])]).unwrap();
        assert!(impute(&d, "x", ImputeStrategy::Mean).is_err());
        assert!(impute(&d, "x", ImputeStrategy::MostFrequent).is_err());
        assert!(impute(&d, "x", ImputeStrategy::Constant(0.0)).is_ok());
    }

    #[test]
    fn binary_fill_demotes_kind() {
        let meta = FeatureMeta::new("b", FeatureKind::Binary);
        let d = Dataset::from_columns(vec![(meta, vec![Cell::Num(1.0), Cell::Missing, Cell::Num(0.0), Cell::Num(0.0)])])
            .unwrap();
        let out = impute(&d, "b", ImputeStrategy::Mean).unwrap();
        assert_eq!(out.meta("b").unwrap().kind, FeatureKind::Numeric);
        let out = impute(&d, "b", ImputeStrategy::MostFrequent).unwrap();
        assert_eq!(out.meta("b").unwrap().kind, FeatureKind::Binary);
    }

    #[test]
    fn scaling_examples() {
        let d = Dataset::from_numeric(&[("a", &[0.0, 5.0, 10.0]), ("z", &[2.0, 4.0, 6.0])]).unwrap();
        let (m, p) = scale(&d, &["a".into()], ScaleMethod::Minmax).unwrap();
        assert_eq!(col(&m, "a"), nums(&[0.0, 0.5, 1.0]));
        assert_eq!(p.apply_value("a", 5.0), Some(0.5));
        let (z, _) = scale(&d, &["z".into()], ScaleMethod::Zscore).unwrap();
        assert_eq!(col(&z, "z"), nums(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn degenerate_scaling_errors() {
        let d = Dataset::from_numeric(&[("c", &[3.0, 3.0]), ("m", &[1.0, f64::NAN])]).unwrap();
        assert!(scale(&d, &["c".into()], ScaleMethod::Minmax).is_err());
        assert!(scale(&d, &["c".into()], ScaleMethod::Zscore).is_err());
        assert!(scale(&d, &["m".into()], ScaleMethod::Zscore).is_err());
    }

    #[test]
    fn one_hot_examples() {
        let cat = |s: &str| Cell::Cat(s.into());
        let d = Dataset::from_columns(vec![(
            FeatureMeta::new("f", FeatureKind::Categorical),
            vec![cat("a"), cat("b"), cat("a"), Cell::Missing],
        )])
        .unwrap();
        let out = one_hot(&d, "f").unwrap();
        assert_eq!(out.feature_names(), vec!["f", "f=a", "f=b"]);
        assert_eq!(out.meta("f").unwrap().role, FeatureRole::Excluded);
        assert_eq!(col(&out, "f=a")[..3], nums(&[1.0, 0.0, 1.0])[..]);
        assert_eq!(col(&out, "f=b")[..3], nums(&[0.0, 1.0, 0.0])[..]);
        assert_eq!(col(&out, "f=a")[3], Cell::Missing);
        assert_eq!(col(&out, "f=b")[3], Cell::Missing);

        let single = Dataset::from_columns(vec![(
            FeatureMeta::new("g", FeatureKind::Categorical),
            vec![cat("x"), cat("x")],
        )])
        .unwrap();
        assert_eq!(col(&one_hot(&single, "g").unwrap(), "g=x"), nums(&[1.0, 1.0]));
    }

    #[test]
    fn fitted_recipe_replays_training_statistics() {
        let train = Dataset::from_numeric(&[("x", &[0.0, 2.0, 4.0, f64::NAN])]).unwrap();
        let test = Dataset::from_numeric(&[("x", &[f64::NAN, 10.0])]).unwrap();
        let recipe = EngineeringRecipe::new(vec![
            RecipeStep::Impute {
                feature: "x".into(),
                strategy: ImputeStrategy::Mean,
            },
            RecipeStep::Scale {
                features: vec!["x".into()],
                method: ScaleMethod::Minmax,
            },
        ]);
        let (fitted, train_out) = recipe.fit(&train, None).unwrap();
        assert_eq!(col(&train_out, "x"), nums(&[0.0, 0.5, 1.0, 0.5]));
        assert_eq!(col(&fitted.apply(&test).unwrap(), "x"), nums(&[0.5, 2.5]));
    }

    #[test]
    fn recipe_json_shape() {
        let json = r#"[
            {"step": "mark_zeros", "features": ["a"]},
            {"step": "impute", "feature": "a", "strategy": "median"},
            {"step": "impute", "feature": "a", "strategy": {"constant": 1.5}},
            {"step": "scale", "features": ["a"], "method": "zscore"},
            {"step": "one_hot", "feature": "c"},
            {"step": "derive_from_constraints"}
        ]"#;
        let r: EngineeringRecipe = serde_json::from_str(json).unwrap();
        assert_eq!(r.steps.len(), 6);
        assert_eq!(
            r.steps[2],
            RecipeStep::Impute {
                feature: "a".into(),
                strategy: ImputeStrategy::Constant(1.5)
            }
        );
    }

    #[test]
    fn dpf_hand_evaluations() {
        assert!((dpf(&[]) - 0.4).abs() < 1e-9);
        let parent = RelativeRecord::diabetic(Kinship::ParentOrFullSibling, 40.0).unwrap();
        assert!((dpf(&[parent]) - 0.88).abs() < 1e-9);
        let parent = RelativeRecord::non_diabetic(Kinship::ParentOrFullSibling, 64.0).unwrap();
        assert!((dpf(&[parent]) - 20.0 / 75.0).abs() < 1e-9);
    }

    #[test]
    fn dpf_monotonicity() {
        let mut rel = Vec::new();
        let mut last = dpf(&rel);
        for k in [Kinship::ParentOrFullSibling, Kinship::HalfAuntHalfUncleCousin, Kinship::HalfSiblingGrandparentAuntUncle] {
            rel.push(RelativeRecord::diabetic(k, 50.0).unwrap());
            let now = dpf(&rel);
            assert!(now >= last);
            last = now;
        }
        let at = |adm| dpf(&[RelativeRecord::diabetic(Kinship::ParentOrFullSibling, adm).unwrap()]);
        assert!(at(30.0) >= at(60.0) && at(60.0) >= at(87.0));
    }

    #[test]
    fn relative_ages_validated() {
        assert!(RelativeRecord::diabetic(Kinship::ParentOrFullSibling, 0.0).is_err());
        assert!(RelativeRecord::non_diabetic(Kinship::ParentOrFullSibling, 122.0).is_err());
    }
}
