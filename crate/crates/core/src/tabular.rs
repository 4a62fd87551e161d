//! Immutable column-oriented dataset with per-feature metadata.
//!
//! Cells are numeric, categorical tokens, or [`Cell::Missing`]. Missingness is
//! a cell state rather than a sentinel value, so a literal `0` stays a legal
//! measurement until [`Dataset::mark_missing_zeros`] is applied explicitly.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Cat(String),
    Missing,
}

impl Cell {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Cat(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureRole {
    Input,
    Target,
    Derived,
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub unit: String,
    pub role: FeatureRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontology_uri: Option<String>,
}

impl FeatureMeta {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
            unit: String::new(),
            role: FeatureRole::Input,
            ontology_uri: None,
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self::new(name, FeatureKind::Numeric)
    }

    pub fn with_role(mut self, role: FeatureRole) -> Self {
        self.role = role;
        self
    }
}

/// Partial metadata applied on top of what `load_csv` infers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaOverride {
    #[serde(default)]
    pub kind: Option<FeatureKind>,
    #[serde(default)]
    pub unit: Option<String>,
    #[serde(default)]
    pub role: Option<FeatureRole>,
    #[serde(default)]
    pub ontology_uri: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<FeatureMeta>,
    columns: Vec<Vec<Cell>>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset, checking name uniqueness, column lengths and binary codomains.
    pub fn new(features: Vec<FeatureMeta>, columns: Vec<Vec<Cell>>, n_rows: usize) -> Result<Self> {
        if features.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature descriptors for {} columns",
                features.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for (meta, col) in features.iter().zip(&columns) {
            if !seen.insert(meta.name.as_str()) {
                return Err(Error::DuplicateFeature(meta.name.clone()));
            }
            if col.len() != n_rows {
                return Err(Error::feature(
                    &meta.name,
                    format!("column has {} cells, dataset has {n_rows} rows", col.len()),
                ));
            }
            check_kind(meta, col)?;
        }
        Ok(Self {
            features,
            columns,
            n_rows,
        })
    }

    pub fn from_columns(columns: Vec<(FeatureMeta, Vec<Cell>)>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |(_, c)| c.len());
        let (features, columns) = columns.into_iter().unzip();
        Self::new(features, columns, n_rows)
    }

    /// Numeric columns where `NaN` marks a missing cell. Mostly for tests and examples.
    pub fn from_numeric(columns: &[(&str, &[f64])]) -> Result<Self> {
        Self::from_columns(
            columns
                .iter()
                .map(|(name, values)| {
                    let cells = values
                        .iter()
                        .map(|&v| if v.is_nan() { Cell::Missing } else { Cell::Num(v) })
                        .collect();
                    (FeatureMeta::numeric(*name), cells)
                })
                .collect(),
        )
    }

    pub fn load_csv(path: impl AsRef<Path>, overrides: &BTreeMap<String, MetaOverride>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, overrides)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, overrides: &BTreeMap<String, MetaOverride>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut seen = HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::DuplicateFeature(h.clone()));
            }
        }
        for name in overrides.keys() {
            if !seen.contains(name.as_str()) {
                return Err(Error::UnknownFeature(name.clone()));
            }
        }

        let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        let mut n_rows = 0;
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::RaggedRow {
                    row,
                    expected: headers.len(),
                    found: record.len(),
                });
            }
            for (col, field) in raw.iter_mut().zip(record.iter()) {
                col.push(field.trim().to_string());
            }
            n_rows += 1;
        }

        let mut features = Vec::with_capacity(headers.len());
        let mut columns = Vec::with_capacity(headers.len());
        for (name, values) in headers.into_iter().zip(raw) {
            let ov = overrides.get(&name);
            let kind = match ov.and_then(|o| o.kind) {
                Some(kind) => kind,
                None => infer_kind(&values),
            };
            let cells = values
                .into_iter()
                .map(|v| parse_cell(v, kind))
                .collect::<Vec<_>>();
            let mut meta = FeatureMeta::new(name, kind);
            if let Some(o) = ov {
                if let Some(unit) = &o.unit {
                    meta.unit = unit.clone();
                }
                if let Some(role) = o.role {
                    meta.role = role;
                }
                meta.ontology_uri = o.ontology_uri.clone();
            }
            features.push(meta);
            columns.push(cells);
        }
        Self::new(features, columns, n_rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.features
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn has_feature(&self, name: &str) -> bool {
        self.features.iter().any(|f| f.name == name)
    }

    pub fn meta(&self, name: &str) -> Result<&FeatureMeta> {
        Ok(&self.features[self.index_of(name)?])
    }

    pub fn column(&self, name: &str) -> Result<&[Cell]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn column_at(&self, idx: usize) -> &[Cell] {
        &self.columns[idx]
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.columns[col][row]
    }

    /// Numeric view of a column; `None` for missing cells.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self.index_of(name)?;
        if self.features[idx].kind == FeatureKind::Categorical {
            return Err(Error::feature(name, "expected a numeric feature, found categorical"));
        }
        Ok(self.columns[idx].iter().map(Cell::as_num).collect())
    }

    pub fn missing_fraction(&self, name: &str) -> Result<f64> {
        let col = self.column(name)?;
        Ok(missing_fraction(col))
    }

    pub fn target_name(&self) -> Option<&str> {
        self.features
            .iter()
            .find(|f| f.role == FeatureRole::Target)
            .map(|f| f.name.as_str())
    }

    /// Features that feed a model: role `input` or `derived`.
    pub fn model_inputs(&self) -> Vec<String> {
        self.features
            .iter()
            .filter(|f| matches!(f.role, FeatureRole::Input | FeatureRole::Derived))
            .map(|f| f.name.clone())
            .collect()
    }

    /// Marks `name` as the single target; a previous target reverts to input.
    pub fn with_target(&self, name: &str) -> Result<Self> {
        let idx = self.index_of(name)?;
        let mut out = self.clone();
        for (i, f) in out.features.iter_mut().enumerate() {
            if i == idx {
                f.role = FeatureRole::Target;
            } else if f.role == FeatureRole::Target {
                f.role = FeatureRole::Input;
            }
        }
        Ok(out)
    }

    pub fn with_role(&self, name: &str, role: FeatureRole) -> Result<Self> {
        let idx = self.index_of(name)?;
        let mut out = self.clone();
        out.features[idx].role = role;
        Ok(out)
    }

    pub(crate) fn with_column(&self, name: &str, column: Vec<Cell>, kind: Option<FeatureKind>) -> Result<Self> {
        let idx = self.index_of(name)?;
        let mut out = self.clone();
        if let Some(kind) = kind {
            out.features[idx].kind = kind;
        }
        check_kind(&out.features[idx], &column)?;
        out.columns[idx] = column;
        Ok(out)
    }

    /// Appends a column; fails on a name collision.
    pub fn with_appended(&self, meta: FeatureMeta, column: Vec<Cell>) -> Result<Self> {
        if self.has_feature(&meta.name) {
            return Err(Error::DuplicateFeature(meta.name));
        }
        if column.len() != self.n_rows {
            return Err(Error::feature(
                &meta.name,
                format!("column has {} cells, dataset has {} rows", column.len(), self.n_rows),
            ));
        }
        check_kind(&meta, &column)?;
        let mut out = self.clone();
        out.features.push(meta);
        out.columns.push(column);
        Ok(out)
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| indices.iter().map(|&i| c[i].clone()).collect())
                .collect(),
            n_rows: indices.len(),
        }
    }

    /// Dense matrix over `names`; every cell must be numeric and present.
    pub fn to_matrix(&self, names: &[String]) -> Result<Matrix> {
        let idx = names
            .iter()
            .map(|n| self.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        let mut data = Vec::with_capacity(self.n_rows * idx.len());
        for row in 0..self.n_rows {
            for (&c, name) in idx.iter().zip(names) {
                match &self.columns[c][row] {
                    Cell::Num(v) => data.push(*v),
                    Cell::Missing => {
                        return Err(Error::feature(name, format!("missing value at row {row}")))
                    }
                    Cell::Cat(t) => {
                        return Err(Error::feature(
                            name,
                            format!("categorical token `{t}` at row {row}; encode it first"),
                        ))
                    }
                }
            }
        }
        Matrix::new(self.n_rows, idx.len(), data)
    }

    pub fn target_vector(&self, name: &str) -> Result<Vec<f64>> {
        self.numeric_column(name)?
            .into_iter()
            .enumerate()
            .map(|(row, v)| v.ok_or_else(|| Error::feature(name, format!("missing target at row {row}"))))
            .collect()
    }

    pub fn descriptive_stats(&self) -> DescriptiveStats {
        DescriptiveStats {
            features: self
                .features
                .iter()
                .zip(&self.columns)
                .map(|(meta, col)| FeatureStats::compute(meta, col))
                .collect(),
        }
    }

    /// Replaces every exact-zero cell of the named numeric features with `Missing`.
    pub fn mark_missing_zeros(&self, names: &[String]) -> Result<Self> {
        let mut out = self.clone();
        for name in names {
            let idx = self.index_of(name)?;
            if self.features[idx].kind == FeatureKind::Categorical {
                return Err(Error::feature(name, "zero-as-missing requires a numeric feature"));
            }
            for cell in &mut out.columns[idx] {
                if matches!(cell, Cell::Num(v) if *v == 0.0) {
                    *cell = Cell::Missing;
                }
            }
        }
        Ok(out)
    }

    /// Seeded row-disjoint train/validation/test partition.
    pub fn split(&self, fractions: SplitFractions, seed: u64) -> Result<(Self, Self, Self)> {
        let [n_train, n_val, n_test] = fractions.sizes(self.n_rows)?;
        let mut order: Vec<usize> = (0..self.n_rows).collect();
        order.shuffle(&mut crate::seeded_rng(seed));
        let (train, rest) = order.split_at(n_train);
        let (val, test) = rest.split_at(n_val);
        debug_assert_eq!(test.len(), n_test);
        Ok((self.select_rows(train), self.select_rows(val), self.select_rows(test)))
    }
}

fn check_kind(meta: &FeatureMeta, col: &[Cell]) -> Result<()> {
    for (row, cell) in col.iter().enumerate() {
        let ok = match (meta.kind, cell) {
            (_, Cell::Missing) => true,
            (FeatureKind::Numeric, Cell::Num(_)) => true,
            (FeatureKind::Binary, Cell::Num(v)) => *v == 0.0 || *v == 1.0,
            (FeatureKind::Categorical, Cell::Cat(_)) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::feature(
                &meta.name,
                format!("cell `{cell}` at row {row} is not valid for a {:?} feature", meta.kind),
            ));
        }
    }
    Ok(())
}

fn infer_kind(values: &[String]) -> FeatureKind {
    let mut all_binary = true;
    let mut any = false;
    for v in values.iter().filter(|v| !v.is_empty()) {
        any = true;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => all_binary &= x == 0.0 || x == 1.0,
            _ => return FeatureKind::Categorical,
        }
    }
    if any && all_binary {
        FeatureKind::Binary
    } else {
        FeatureKind::Numeric
    }
}

fn parse_cell(raw: String, kind: FeatureKind) -> Cell {
    if raw.is_empty() {
        return Cell::Missing;
    }
    match kind {
        FeatureKind::Categorical => Cell::Cat(raw),
        _ => match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Num(v),
            _ => Cell::Cat(raw),
        },
    }
}

pub(crate) fn missing_fraction(col: &[Cell]) -> f64 {
    if col.is_empty() {
        return 0.0;
    }
    col.iter().filter(|c| c.is_missing()).count() as f64 / col.len() as f64
}

/// Train/validation/test fractions; each strictly positive, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self> {
        let f = Self {
            train,
            validation,
            test,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "split fractions must all be positive, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Floors each share, then hands leftover rows out by largest fractional
    /// part (ties favour train, then validation).
    pub fn sizes(&self, n: usize) -> Result<[usize; 3]> {
        self.validate()?;
        let exact = [self.train, self.validation, self.test].map(|f| f * n as f64);
        let mut sizes = exact.map(|e| e.floor() as usize);
        let assigned: usize = sizes.iter().sum();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for &slot in order.iter().cycle().take(n.saturating_sub(assigned)) {
            sizes[slot] += 1;
        }
        Ok(sizes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub features: Vec<FeatureStats>,
}

impl DescriptiveStats {
    pub fn get(&self, name: &str) -> Option<&FeatureStats> {
        self.features.iter().find(|f| f.name == name)
    }
}

/// One row of the descriptive table. `count` is the total row count; moments
/// and quantiles are over non-missing cells and are `None` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub name: String,
    pub kind: FeatureKind,
    pub count: usize,
    pub non_missing: usize,
    pub missing_fraction: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub q25: Option<f64>,
    pub median: Option<f64>,
    pub q75: Option<f64>,
    pub max: Option<f64>,
}

impl FeatureStats {
    fn compute(meta: &FeatureMeta, col: &[Cell]) -> Self {
        let mut values: Vec<f64> = col.iter().filter_map(Cell::as_num).collect();
        let non_missing = col.iter().filter(|c| !c.is_missing()).count();
        let mut stats = Self {
            name: meta.name.clone(),
            kind: meta.kind,
            count: col.len(),
            non_missing,
            missing_fraction: missing_fraction(col),
            mean: None,
            std: None,
            min: None,
            q25: None,
            median: None,
            q75: None,
            max: None,
        };
        if meta.kind == FeatureKind::Categorical || values.is_empty() {
            return stats;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        stats.mean = Some(mean);
        if values.len() >= 2 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            stats.std = Some((ss / (n - 1.0)).sqrt());
        }
        stats.min = values.first().copied();
        stats.max = values.last().copied();
        stats.q25 = Some(quantile_sorted(&values, 0.25));
        stats.median = Some(quantile_sorted(&values, 0.5));
        stats.q75 = Some(quantile_sorted(&values, 0.75));
        stats
    }
}

/// Linear interpolation between order statistics at position `q·(n−1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
