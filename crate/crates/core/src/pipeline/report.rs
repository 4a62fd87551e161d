//! The run report and its JSON and Markdown renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ProblemStatement, SeedSource};
use crate::constraints::{QualityScorecard, StatementKind, Status, ViolationReport};
use crate::engineering::EngineeringRecipe;
use crate::error::{Error, Result};
use crate::evaluation::{
    Candidate, CurvePoint, CvResult, GateReport, LeaderboardEntry, LeakageMode, Metric, MetricSet, Severity,
    Verdict,
};
use crate::tabular::{DescriptiveStats, SplitFractions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ProblemUnderstanding,
    DataCollection,
    DataEngineering,
    ModelTraining,
    ModelOptimization,
    ModelIntegration,
    AnalyticalDecisionMaking,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::ProblemUnderstanding,
        Phase::DataCollection,
        Phase::DataEngineering,
        Phase::ModelTraining,
        Phase::ModelOptimization,
        Phase::ModelIntegration,
        Phase::AnalyticalDecisionMaking,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Phase::ProblemUnderstanding => "Problem understanding",
            Phase::DataCollection => "Data collection",
            Phase::DataEngineering => "Data engineering",
            Phase::ModelTraining => "Model training",
            Phase::ModelOptimization => "Model optimization",
            Phase::ModelIntegration => "Model integration",
            Phase::AnalyticalDecisionMaking => "Analytical decision making",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseStatus {
    Completed,
    CompletedWithWarnings,
    Failed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub phase: Phase,
    pub status: PhaseStatus,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    GatesFailed,
    ConstraintAbort,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::GatesFailed => 2,
            RunStatus::ConstraintAbort => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortMarker {
    pub phase: Phase,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentStamp {
    pub tool_version: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub config_sha256: String,
    pub data_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroMarking {
    pub feature: String,
    pub zeros: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub path: String,
    pub rows: usize,
    pub features: usize,
    pub target: String,
    pub zero_as_missing: Vec<ZeroMarking>,
}

/// One statement under both evaluations, with the policy applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOutcome {
    pub name: String,
    pub kind: StatementKind,
    pub severity: Severity,
    pub raw_status: Status,
    pub raw_violations: usize,
    pub status: Status,
    pub violations: usize,
    pub skipped_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSummary {
    pub path: String,
    /// Evaluated on the file as loaded.
    pub raw: ViolationReport,
    /// Evaluated after zero-as-missing marking; this one gates the run.
    pub gating: ViolationReport,
    pub outcomes: Vec<ConstraintOutcome>,
    pub hard_failures: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineeringSummary {
    pub recipe: EngineeringRecipe,
    pub notes: Vec<String>,
    pub model_inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenModel {
    pub index: usize,
    pub candidate: Candidate,
    pub cv: CvResult,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutResult {
    pub fractions: SplitFractions,
    pub fit_rows: usize,
    pub test_rows: usize,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Wall-clock time of the run; the only field that differs between reruns.
    pub generated_at: String,
    pub environment: EnvironmentStamp,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort: Option<AbortMarker>,
    pub problem: ProblemStatement,
    pub phases: Vec<PhaseEntry>,
    pub data: DataSummary,
    pub descriptive_stats: DescriptiveStats,
    pub constraints: ConstraintSummary,
    pub scorecard: QualityScorecard,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engineering: Option<EngineeringSummary>,
    pub selection_metric: Metric,
    pub leakage: LeakageMode,
    pub leaderboard: Vec<LeaderboardEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_model: Option<ChosenModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holdout: Option<HoldoutResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<GateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Vec<CurvePoint>>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_markdown(&self) -> String {
        render_markdown(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Markdown,
}

/// Writes the report in each requested format.
pub fn emit_report(report: &RunReport, json: Option<&Path>, markdown: Option<&Path>) -> Result<()> {
    let write = |path: &Path, text: String| -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    };
    if let Some(p) = json {
        write(p, report.to_json()?)?;
    }
    if let Some(p) = markdown {
        write(p, report.to_markdown())?;
    }
    Ok(())
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn cell(text: &str) -> String {
    text.replace('|', "\\|").replace('\n', " ")
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Vacuous => "vacuous",
    }
}

fn candidate_label(c: &Candidate) -> String {
    let mut params = serde_json::to_value(&c.spec).unwrap_or_default();
    let family = c.spec.family();
    if let Some(obj) = params.as_object_mut() {
        obj.remove("family");
    }
    let scaling = match c.scaling {
        Some(m) => serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        None => "none".into(),
    };
    format!("{family} {params} scaling={scaling}")
}

/// Descriptive statistics as a Markdown table.
pub fn stats_markdown(stats: &DescriptiveStats) -> String {
    let mut out = String::new();
    out.push_str("| Feature | Count | Missing | Mean | Std | Min | 25% | 50% | 75% | Max |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for f in &stats.features {
        let _ = writeln!(
            out,
            "| {} | {} | {:.2}% | {} | {} | {} | {} | {} | {} | {} |",
            f.name,
            f.count,
            100.0 * f.missing_fraction,
            num(f.mean),
            num(f.std),
            num(f.min),
            num(f.q25),
            num(f.median),
            num(f.q75),
            num(f.max)
        );
    }
    out
}

/// One row per statement with its status and counts.
pub fn violations_markdown(report: &ViolationReport) -> String {
    let mut out = String::from("| Statement | Kind | Status | Violations | Skipped | Evaluated |\n|---|---|---|---:|---:|---:|\n");
    for s in &report.statements {
        let _ = writeln!(
            out,
            "| {} | {:?} | {} | {} | {} | {} |",
            s.name,
            s.kind,
            status_word(s.status),
            s.violating_rows.len(),
            s.skipped_rows,
            s.evaluated_rows
        );
    }
    out
}

fn render_markdown(r: &RunReport) -> String {
    let mut md = String::new();
    let out = &mut md;
    let _ = writeln!(out, "# {}\n", cell(&r.problem.title));
    if let Some(a) = &r.abort {
        let _ = writeln!(out, "> **RUN ABORTED** during {}: {}\n", a.phase.title(), a.reason);
    }
    let _ = writeln!(out, "- Status: `{}`", serde_json::to_value(r.status).unwrap_or_default().as_str().unwrap_or(""));
    let _ = writeln!(out, "- Generated: {}", r.generated_at);
    let e = &r.environment;
    let _ = writeln!(out, "- Tool version: {}", e.tool_version);
    let _ = writeln!(out, "- Seed: {} (from {:?})", e.seed, e.seed_source);
    let _ = writeln!(out, "- Config SHA-256: `{}`", e.config_sha256);
    let _ = writeln!(out, "- Data SHA-256: `{}`\n", e.data_sha256);

    let _ = writeln!(out, "## Problem\n");
    for (label, items) in [
        ("Goals", &r.problem.goals),
        ("Soft goals", &r.problem.soft_goals),
        ("Actors", &r.problem.actors),
        ("Dependencies", &r.problem.dependencies),
    ] {
        if !items.is_empty() {
            let _ = writeln!(out, "**{label}**\n");
            for i in items {
                let _ = writeln!(out, "- {i}");
            }
            let _ = writeln!(out);
        }
    }

    let _ = writeln!(out, "## Phases\n\n| # | Phase | Status | Notes |\n|---|---|---|---|");
    for (i, p) in r.phases.iter().enumerate() {
        let status = serde_json::to_value(p.status).unwrap_or_default();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            i + 1,
            p.phase.title(),
            status.as_str().unwrap_or(""),
            cell(&p.notes.join("; "))
        );
    }

    let d = &r.data;
    let _ = writeln!(out, "\n## Data\n\n`{}`: {} rows, {} features, target `{}`.\n", d.path, d.rows, d.features, d.target);
    if !d.zero_as_missing.is_empty() {
        let _ = writeln!(out, "| Zero read as missing | Zeros | Fraction |\n|---|---:|---:|");
        for z in &d.zero_as_missing {
            let _ = writeln!(out, "| {} | {} | {:.2}% |", z.feature, z.zeros, 100.0 * z.fraction);
        }
        let _ = writeln!(out);
    }
    out.push_str(&stats_markdown(&r.descriptive_stats));

    let c = &r.constraints;
    let _ = writeln!(out, "\n## Constraints\n\nSource: `{}`\n", c.path);
    let _ = writeln!(out, "| Statement | Kind | Severity | Raw data | After zero marking | Skipped rows |");
    let _ = writeln!(out, "|---|---|---|---|---|---:|");
    for o in &c.outcomes {
        let _ = writeln!(
            out,
            "| {} | {:?} | {:?} | {} ({}) | {} ({}) | {} |",
            o.name,
            o.kind,
            o.severity,
            status_word(o.raw_status),
            o.raw_violations,
            status_word(o.status),
            o.violations,
            o.skipped_rows
        );
    }
    for (label, list) in [("Hard failures", &c.hard_failures), ("Warnings", &c.warnings)] {
        if !list.is_empty() {
            let _ = writeln!(out, "\n{label}: {}", list.join(", "));
        }
    }

    let s = &r.scorecard;
    let _ = writeln!(out, "\n## Data quality scorecard\n");
    let _ = write!(out, "| Group | Criterion |");
    for f in &s.features {
        let _ = write!(out, " {f} |");
    }
    let _ = write!(out, "\n|---|---|");
    for _ in &s.features {
        let _ = write!(out, ":---:|");
    }
    let _ = writeln!(out);
    for row in &s.rows {
        let _ = write!(out, "| {:?} | {} |", row.group, row.criterion.label());
        for c in &row.cells {
            let text = match c {
                Some(sc) if sc.provenance == crate::constraints::Provenance::Computed => format!("{}*", sc.grade),
                Some(sc) => sc.grade.to_string(),
                None => String::new(),
            };
            let _ = write!(out, " {} |", cell(&text));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "\n`*` computed from the data; other cells are declared.");
    if !s.divergences.is_empty() {
        let _ = writeln!(out, "\n| Feature | Criterion | Declared | Computed |\n|---|---|:---:|:---:|");
        for dv in &s.divergences {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                dv.feature,
                dv.criterion.label(),
                cell(dv.declared.symbol()),
                cell(dv.computed.symbol())
            );
        }
    }

    if let Some(eng) = &r.engineering {
        let _ = writeln!(out, "\n## Engineering\n");
        for step in &eng.recipe.steps {
            let _ = writeln!(out, "- `{}`", serde_json::to_string(step).unwrap_or_default());
        }
        for n in &eng.notes {
            let _ = writeln!(out, "\n> {n}");
        }
        let _ = writeln!(out, "\nModel inputs: {}", eng.model_inputs.join(", "));
    }

    let _ = writeln!(out, "\n## Leaderboard\n");
    if r.leaderboard.is_empty() {
        let _ = writeln!(out, "No models were trained.");
    } else {
        let _ = writeln!(
            out,
            "Ranked by mean {} over cross-validation folds ({:?} preprocessing).\n",
            r.selection_metric, r.leakage
        );
        let shown = [Metric::Accuracy, Metric::Sensitivity, Metric::Specificity, Metric::F1, Metric::Auc];
        let _ = write!(out, "| Rank | Candidate |");
        for m in shown {
            let _ = write!(out, " {m} |");
        }
        let _ = write!(out, "\n|---:|---|");
        for _ in shown {
            let _ = write!(out, "---:|");
        }
        let _ = writeln!(out);
        for (rank, e) in r.leaderboard.iter().enumerate() {
            let _ = write!(out, "| {} | {} |", rank + 1, cell(&candidate_label(&e.candidate)));
            match (&e.cv, &e.error) {
                (Some(cv), _) => {
                    for m in shown {
                        let _ = write!(out, " {} ± {} |", num(cv.summary.mean.get(m)), num(cv.summary.std.get(m)));
                    }
                }
                (None, err) => {
                    let _ = write!(out, " error: {} |", cell(err.as_deref().unwrap_or("unknown")));
                    for _ in 1..shown.len() {
                        let _ = write!(out, " |");
                    }
                }
            }
            let _ = writeln!(out);
        }
    }

    if let Some(m) = &r.chosen_model {
        let _ = writeln!(out, "\n## Chosen model\n");
        let _ = writeln!(out, "- Candidate #{}: {}", m.index, cell(&candidate_label(&m.candidate)));
        let _ = writeln!(out, "- Saved to `{}` (SHA-256 `{}`)", m.path, m.sha256);
    }
    if let Some(h) = &r.holdout {
        let _ = writeln!(
            out,
            "\n## Hold-out check\n\nFitted on {} rows, tested on {} rows: accuracy {}, sensitivity {}, specificity {}.",
            h.fit_rows,
            h.test_rows,
            num(h.metrics.accuracy),
            num(h.metrics.sensitivity),
            num(h.metrics.specificity)
        );
    }
    if let Some(g) = &r.gates {
        let verdict = match g.verdict {
            Verdict::Pass => "PASS",
            Verdict::PassWithWarnings => "PASS WITH WARNINGS",
            Verdict::Fail => "FAIL",
        };
        let _ = writeln!(out, "\n## Performance gates\n\nVerdict: **{verdict}**\n");
        let _ = writeln!(out, "| Gate | Observed | Result |\n|---|---:|---|");
        for o in &g.outcomes {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                cell(&o.gate.to_string()),
                num(o.observed),
                if o.passed { "pass" } else { "FAIL" }
            );
        }
    }
    if let Some(points) = &r.diagnostics {
        let _ = writeln!(out, "\n## Capacity curve\n\n| Candidate | Train loss | Test loss |\n|---|---:|---:|");
        for p in points {
            let _ = writeln!(
                out,
                "| {} | {:.4} | {:.4} |",
                cell(&candidate_label(&p.candidate)),
                p.train_loss,
                p.test_loss
            );
        }
    }
    md
}
