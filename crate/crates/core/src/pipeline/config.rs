//! The single JSON document that drives a pipeline run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constraints::{DeclaredGrid, StatementKind};
use crate::engineering::EngineeringRecipe;
use crate::error::{Error, Result};
use crate::evaluation::{LeakageMode, Metric, ModelGrid, PerformanceGate, Severity};
use crate::tabular::{MetaOverride, SplitFractions};

/// Environment variable consulted for the seed when neither flag nor config sets it.
pub const SEED_ENV: &str = "CMML_SEED";

/// Structured free text describing the project's goal model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemStatement {
    pub title: String,
    #[serde(default)]
    pub goals: Vec<String>,
    #[serde(default)]
    pub soft_goals: Vec<String>,
    #[serde(default)]
    pub actors: Vec<String>,
    #[serde(default)]
    pub dependencies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    pub target: String,
    #[serde(default)]
    pub zero_as_missing: Vec<String>,
    #[serde(default)]
    pub overrides: BTreeMap<String, MetaOverride>,
}

/// How failures of each statement kind are treated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintPolicy {
    pub range: Severity,
    pub rule: Severity,
    pub invariant: Severity,
    /// Per-statement severities, keyed by statement name.
    pub overrides: BTreeMap<String, Severity>,
}

impl Default for ConstraintPolicy {
    fn default() -> Self {
        Self {
            range: Severity::Hard,
            rule: Severity::Soft,
            invariant: Severity::Soft,
            overrides: BTreeMap::new(),
        }
    }
}

impl ConstraintPolicy {
    pub fn severity(&self, name: &str, kind: StatementKind) -> Severity {
        if let Some(s) = self.overrides.get(name) {
            return *s;
        }
        match kind {
            StatementKind::Range => self.range,
            StatementKind::Rule => self.rule,
            StatementKind::Invariant => self.invariant,
            StatementKind::Derive => Severity::Soft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub path: PathBuf,
    #[serde(default)]
    pub policy: ConstraintPolicy,
    /// Stop before training when a hard statement fails.
    #[serde(default = "yes")]
    pub abort_on_hard_failure: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualitySection {
    #[serde(default)]
    pub declared: DeclaredGrid,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineeringSection {
    #[serde(default)]
    pub steps: EngineeringRecipe,
    /// Remarks echoed into the report, e.g. deviations worth flagging.
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSection {
    #[serde(default = "five")]
    pub k: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "accuracy")]
    pub selection_metric: Metric,
    #[serde(default)]
    pub leakage: LeakageMode,
    /// Train/validation/test shares for the hold-out diagnostics.
    #[serde(default)]
    pub split: Option<SplitFractions>,
}

fn five() -> usize {
    5
}

fn accuracy() -> Metric {
    Metric::Accuracy
}

/// A capacity sweep reported as train/test losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub curve: ModelGrid,
    #[serde(default = "three_tenths")]
    pub test_fraction: f64,
}

fn three_tenths() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub json: PathBuf,
    #[serde(default)]
    pub markdown: Option<PathBuf>,
    pub model: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub problem: ProblemStatement,
    pub data: DataSection,
    pub constraints: ConstraintSection,
    #[serde(default)]
    pub quality: QualitySection,
    #[serde(default)]
    pub engineering: EngineeringSection,
    pub models: Vec<ModelGrid>,
    pub validation: ValidationSection,
    #[serde(default)]
    pub gates: Vec<PerformanceGate>,
    #[serde(default)]
    pub diagnostics: Option<DiagnosticsSection>,
    pub report: ReportSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    Config,
    Environment,
}

/// Picks the seed: command-line flag, then config, then environment.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<(u64, SeedSource)> {
    if let Some(s) = flag {
        return Ok((s, SeedSource::Flag));
    }
    if let Some(s) = config {
        return Ok((s, SeedSource::Config));
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map(|s| (s, SeedSource::Environment))
            .map_err(|_| Error::Config(format!("{SEED_ENV}={text:?} is not an unsigned integer"))),
        None => Err(Error::Config(format!(
            "no seed: pass --seed, set validation.seed, or set {SEED_ENV}"
        ))),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("model grid is empty".into()));
        }
        if self.validation.k < 2 {
            return Err(Error::Config("validation.k must be at least 2".into()));
        }
        if let Some(split) = &self.validation.split {
            split.validate()?;
        }
        for g in &self.gates {
            g.validate()?;
        }
        Ok(())
    }

    /// Hash of every field that affects results; output paths are excluded.
    pub fn content_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("report");
        }
        sha256_hex(value.to_string().as_bytes())
    }

    /// Resolves `p` against the directory holding the config file.
    pub fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }
}
