//! Seven-phase orchestration from config to report and saved model.

use std::path::Path;

use super::config::{resolve_seed, sha256_hex, PipelineConfig, SEED_ENV};
use super::report::*;
use crate::constraints::{self, quality_scorecard, StatementKind, Status};
use crate::engineering::{FittedRecipe, FittedStep};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_document, expand_grids, fit_candidate, fit_curve, gate_check, grid_search, EvalContext, Severity,
    Verdict,
};
use crate::learners::ModelDocument;
use crate::tabular::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// All seven phases.
    Full,
    /// Stops after the model is saved; gates are not evaluated.
    TrainOnly,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Value of the seed environment variable, if set.
    pub env_seed: Option<String>,
}

impl RunOptions {
    pub fn from_env(seed: Option<u64>) -> Self {
        Self {
            seed,
            env_seed: std::env::var(SEED_ENV).ok(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub model: Option<ModelDocument>,
}

fn entry(phase: Phase, status: PhaseStatus, notes: Vec<String>) -> PhaseEntry {
    PhaseEntry { phase, status, notes }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Runs the pipeline in memory. Input paths in `config` are resolved against `base`.
pub fn run(config: &PipelineConfig, base: &Path, opts: &RunOptions, mode: RunMode) -> Result<RunOutput> {
    config.validate()?;
    let (seed, seed_source) = resolve_seed(opts.seed, config.validation.seed, opts.env_seed.as_deref())?;
    let candidates = expand_grids(&config.models, seed)?;
    let mut phases = Vec::new();

    let p = &config.problem;
    phases.push(entry(
        Phase::ProblemUnderstanding,
        PhaseStatus::Completed,
        vec![format!(
            "{} goals, {} soft goals, {} actors, {} dependencies recorded",
            p.goals.len(),
            p.soft_goals.len(),
            p.actors.len(),
            p.dependencies.len()
        )],
    ));

    let data_path = PipelineConfig::resolve(base, &config.data.path);
    let bytes = std::fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let target = &config.data.target;
    let raw = Dataset::read_csv(bytes.as_slice(), &config.data.overrides)?.with_target(target)?;
    if candidates.iter().any(|c| c.spec.is_classifier()) {
        let y = raw.target_vector(target)?;
        if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return Err(Error::Config(format!("target `{target}` must be binary (0/1) for classification")));
        }
    }
    let mut zero_as_missing = Vec::new();
    for f in &config.data.zero_as_missing {
        let zeros = raw.numeric_column(f)?.iter().filter(|v| **v == Some(0.0)).count();
        zero_as_missing.push(ZeroMarking {
            feature: f.clone(),
            zeros,
            fraction: zeros as f64 / raw.n_rows().max(1) as f64,
        });
    }
    let marked = raw.mark_missing_zeros(&config.data.zero_as_missing)?;
    let data = DataSummary {
        path: config.data.path.display().to_string(),
        rows: raw.n_rows(),
        features: raw.n_features(),
        target: target.clone(),
        zero_as_missing,
    };
    let mut notes = vec![format!("{} rows, {} features", data.rows, data.features)];
    if !data.zero_as_missing.is_empty() {
        let parts: Vec<String> = data
            .zero_as_missing
            .iter()
            .map(|z| format!("{} {:.2}%", z.feature, 100.0 * z.fraction))
            .collect();
        notes.push(format!("zeros read as missing: {}", parts.join(", ")));
    }
    phases.push(entry(Phase::DataCollection, PhaseStatus::Completed, notes));

    let constraints_path = PipelineConfig::resolve(base, &config.constraints.path);
    let doc = constraints::load(&constraints_path)?;
    let raw_report = constraints::evaluate(&doc, &raw)?;
    let gating = constraints::evaluate(&doc, &marked)?;
    let policy = &config.constraints.policy;
    let mut outcomes = Vec::new();
    let (mut hard_failures, mut warnings) = (Vec::new(), Vec::new());
    for (r, g) in raw_report.statements.iter().zip(&gating.statements) {
        let severity = policy.severity(&g.name, g.kind);
        if g.status == Status::Fail && g.kind != StatementKind::Derive {
            match severity {
                Severity::Hard => hard_failures.push(g.name.clone()),
                Severity::Soft => warnings.push(g.name.clone()),
            }
        }
        outcomes.push(ConstraintOutcome {
            name: g.name.clone(),
            kind: g.kind,
            severity,
            raw_status: r.status,
            raw_violations: r.violating_rows.len(),
            status: g.status,
            violations: g.violating_rows.len(),
            skipped_rows: g.skipped_rows,
        });
    }
    let scorecard = quality_scorecard(&marked, &gating, &config.quality.declared);
    let constraint_summary = ConstraintSummary {
        path: config.constraints.path.display().to_string(),
        raw: raw_report,
        gating,
        outcomes,
        hard_failures: hard_failures.clone(),
        warnings: warnings.clone(),
    };
    let mut report = RunReport {
        generated_at: timestamp(),
        environment: EnvironmentStamp {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            seed_source,
            config_sha256: config.content_hash(),
            data_sha256: sha256_hex(&bytes),
        },
        status: RunStatus::Success,
        abort: None,
        problem: config.problem.clone(),
        phases,
        data,
        descriptive_stats: raw.descriptive_stats(),
        constraints: constraint_summary,
        scorecard,
        engineering: None,
        selection_metric: config.validation.selection_metric,
        leakage: config.validation.leakage,
        leaderboard: Vec::new(),
        chosen_model: None,
        holdout: None,
        gates: None,
        diagnostics: None,
    };

    let mut notes = vec![format!(
        "{} statements evaluated, {} hard failures, {} warnings",
        report.constraints.outcomes.len(),
        hard_failures.len(),
        warnings.len()
    )];
    if !hard_failures.is_empty() && config.constraints.abort_on_hard_failure {
        let reason = format!("hard constraint failures: {}", hard_failures.join(", "));
        notes.push(reason.clone());
        report.phases.push(entry(Phase::DataEngineering, PhaseStatus::Aborted, notes));
        report.status = RunStatus::ConstraintAbort;
        report.abort = Some(AbortMarker {
            phase: Phase::DataEngineering,
            reason,
        });
        return Ok(RunOutput { report, model: None });
    }
    let recipe = &config.engineering.steps;
    let (_, engineered) = recipe.fit(&marked, Some(&doc))?;
    let model_inputs = engineered.model_inputs();
    notes.push(format!("{} recipe steps, {} model inputs", recipe.steps.len(), model_inputs.len()));
    let warned = !warnings.is_empty() || !hard_failures.is_empty();
    report.engineering = Some(EngineeringSummary {
        recipe: recipe.clone(),
        notes: config.engineering.notes.clone(),
        model_inputs,
    });
    report.phases.push(entry(
        Phase::DataEngineering,
        if warned { PhaseStatus::CompletedWithWarnings } else { PhaseStatus::Completed },
        notes,
    ));

    let ctx = EvalContext {
        recipe,
        constraints: Some(&doc),
        leakage: config.validation.leakage,
    };
    let k = config.validation.k;
    let grid = grid_search(&marked, &candidates, config.validation.selection_metric, &ctx, k, seed)?;
    let failed = grid.leaderboard.iter().filter(|e| e.error.is_some()).count();
    report.phases.push(entry(
        Phase::ModelTraining,
        if failed > 0 { PhaseStatus::CompletedWithWarnings } else { PhaseStatus::Completed },
        vec![format!("{} candidates cross-validated over {k} folds, {failed} failed", candidates.len())],
    ));
    report.leaderboard = grid.leaderboard.clone();

    let Some(best) = grid.best().cloned() else {
        let first = grid.leaderboard.iter().find_map(|e| e.error.clone()).unwrap_or_default();
        return Err(Error::Model(format!(
            "no candidate produced a defined {} score: {first}",
            config.validation.selection_metric
        )));
    };
    let cv = best.cv.clone().expect("scored entries carry their CV result");
    let mut notes = vec![format!(
        "selected candidate #{} ({}) with mean {} {:.4}",
        best.index,
        best.candidate.spec.family(),
        config.validation.selection_metric,
        best.score.unwrap_or(f64::NAN)
    )];
    if let Some(fractions) = config.validation.split {
        let (train, _, test) = marked.split(fractions, seed)?;
        let held = fit_candidate(&train, &best.candidate, recipe, Some(&doc))?;
        let metrics = evaluate_document(&held, &test)?;
        notes.push(format!("hold-out accuracy {:.4}", metrics.accuracy.unwrap_or(f64::NAN)));
        report.holdout = Some(HoldoutResult {
            fractions,
            fit_rows: train.n_rows(),
            test_rows: test.n_rows(),
            metrics,
        });
    }
    if let Some(diag) = &config.diagnostics {
        let sweep = expand_grids(std::slice::from_ref(&diag.curve), seed)?;
        let points = fit_curve(&marked, &sweep, &ctx, diag.test_fraction, seed)?;
        notes.push(format!("capacity curve over {} points", points.len()));
        report.diagnostics = Some(points);
    }
    report.phases.push(entry(Phase::ModelOptimization, PhaseStatus::Completed, notes));

    let mut model = fit_candidate(&marked, &best.candidate, recipe, Some(&doc))?;
    if !config.data.zero_as_missing.is_empty() {
        let mut steps = vec![FittedStep::MarkZeros {
            features: config.data.zero_as_missing.clone(),
        }];
        steps.extend(model.preprocessing.steps);
        model.preprocessing = FittedRecipe { steps };
    }
    let model_json = model.to_json()? + "\n";
    report.chosen_model = Some(ChosenModel {
        index: best.index,
        candidate: best.candidate.clone(),
        cv: cv.clone(),
        path: config.report.model.display().to_string(),
        sha256: sha256_hex(model_json.as_bytes()),
    });
    report.phases.push(entry(
        Phase::ModelIntegration,
        PhaseStatus::Completed,
        vec![format!("retrained on all {} rows", marked.n_rows())],
    ));

    if mode == RunMode::Full {
        let gates = gate_check(&cv.summary.mean, &config.gates);
        let notes = gates
            .outcomes
            .iter()
            .map(|o| {
                let observed = o.observed.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"));
                format!("{}: {observed} {}", o.gate, if o.passed { "pass" } else { "FAIL" })
            })
            .collect();
        let status = match gates.verdict {
            Verdict::Pass => PhaseStatus::Completed,
            Verdict::PassWithWarnings => PhaseStatus::CompletedWithWarnings,
            Verdict::Fail => {
                report.status = RunStatus::GatesFailed;
                PhaseStatus::Failed
            }
        };
        report.phases.push(entry(Phase::AnalyticalDecisionMaking, status, notes));
        report.gates = Some(gates);
    }
    Ok(RunOutput { report, model: Some(model) })
}

/// Loads the config, runs it and writes the model and report files it names.
pub fn execute(config_path: &Path, opts: &RunOptions, mode: RunMode) -> Result<RunReport> {
    let config = PipelineConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(""));
    let out = run(&config, base, opts, mode)?;
    if let Some(model) = &out.model {
        let path = PipelineConfig::resolve(base, &config.report.model);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        model.save(&path)?;
    }
    let json = PipelineConfig::resolve(base, &config.report.json);
    let markdown = config.report.markdown.as_ref().map(|p| PipelineConfig::resolve(base, p));
    emit_report(&out.report, Some(&json), markdown.as_deref())?;
    Ok(out.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{predict_csv, PROBABILITY_COLUMN};

    fn fixture(dir: &Path, cmc: &str, models: &str, gates: &str) -> PipelineConfig {
        let mut csv = String::from("a,b,y\n");
        for i in 0..40 {
            let y = i % 2;
            let a = i as f64 + 0.5 * y as f64;
            let b = if y == 1 { 10.0 + (i % 7) as f64 } else { (i % 5) as f64 };
            csv.push_str(&format!("{a},{b},{y}\n"));
        }
        std::fs::write(dir.join("d.csv"), csv).unwrap();
        std::fs::write(dir.join("c.cmc"), cmc).unwrap();
        PipelineConfig::from_json(&format!(
            r#"{{
                "problem": {{"title": "toy", "goals": ["separate"]}},
                "data": {{"path": "d.csv", "target": "y"}},
                "constraints": {{"path": "c.cmc"}},
                "models": {models},
                "validation": {{"k": 4, "seed": 9}},
                "gates": {gates},
                "report": {{"json": "out/r.json", "markdown": "out/r.md", "model": "out/m.json"}}
            }}"#
        ))
        .unwrap()
    }

    const KNN: &str = r#"[{"family": "knn", "grid": {"k": [1, 3]}}]"#;

    #[test]
    fn phases_run_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path(), "range a: >= 0\n", KNN, r#"[{"metric": "accuracy", "comparator": ">=", "threshold": 0.5}]"#);
        let out = run(&cfg, dir.path(), &RunOptions::default(), RunMode::Full).unwrap();
        let phases: Vec<Phase> = out.report.phases.iter().map(|p| p.phase).collect();
        assert_eq!(phases, Phase::ALL);
        assert_eq!(out.report.status, RunStatus::Success);
        assert_eq!(out.report.leaderboard.len(), 2);
        assert!(out.model.is_some());

        let train = run(&cfg, dir.path(), &RunOptions::default(), RunMode::TrainOnly).unwrap();
        assert_eq!(train.report.phases.len(), 6);
        assert!(train.report.gates.is_none());
    }

    #[test]
    fn hard_constraint_failure_aborts_with_report() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path(), "range a: > 100\ninvariant few: mean(y) < 0.1\n", KNN, "[]");
        let out = run(&cfg, dir.path(), &RunOptions::default(), RunMode::Full).unwrap();
        let r = &out.report;
        assert_eq!(r.status, RunStatus::ConstraintAbort);
        assert_eq!(r.status.exit_code(), 3);
        assert!(r.abort.is_some() && r.leaderboard.is_empty() && out.model.is_none());
        assert_eq!(r.constraints.hard_failures, vec!["a".to_string()]);
        assert_eq!(r.constraints.warnings, vec!["few".to_string()]);
        assert_eq!(r.phases.last().unwrap().status, PhaseStatus::Aborted);
        assert_eq!(RunReport::from_json(&r.to_json().unwrap()).unwrap(), *r);
        assert!(r.to_markdown().contains("RUN ABORTED"));
    }

    #[test]
    fn soft_policy_lets_failures_through() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path(), "range a: > 100\n", KNN, "[]");
        cfg.constraints.policy.range = Severity::Soft;
        let out = run(&cfg, dir.path(), &RunOptions::default(), RunMode::Full).unwrap();
        assert_eq!(out.report.status, RunStatus::Success);
        assert_eq!(out.report.phases[2].status, PhaseStatus::CompletedWithWarnings);
    }

    #[test]
    fn failing_hard_gate_sets_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let gates = r#"[{"metric": "accuracy", "comparator": ">", "threshold": 1.0}]"#;
        let cfg = fixture(dir.path(), "", KNN, gates);
        let out = run(&cfg, dir.path(), &RunOptions::default(), RunMode::Full).unwrap();
        assert_eq!(out.report.status, RunStatus::GatesFailed);
        assert_eq!(out.report.status.exit_code(), 2);
        assert_eq!(out.report.phases.len(), 7);
    }

    #[test]
    fn seed_is_required() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path(), "", KNN, "[]");
        cfg.validation.seed = None;
        assert!(run(&cfg, dir.path(), &RunOptions::default(), RunMode::Full).is_err());
        let opts = RunOptions {
            seed: None,
            env_seed: Some("11".into()),
        };
        let out = run(&cfg, dir.path(), &opts, RunMode::Full).unwrap();
        assert_eq!(out.report.environment.seed, 11);
    }

    #[test]
    fn classifier_needs_binary_target() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture(dir.path(), "", KNN, "[]");
        cfg.data.target = "b".into();
        assert!(matches!(run(&cfg, dir.path(), &RunOptions::default(), RunMode::Full), Err(Error::Config(_))));
    }

    #[test]
    fn execute_writes_files_and_predicts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = fixture(dir.path(), "", r#"[{"family": "knn", "params": {"k": 1}}]"#, "[]");
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
        let report = execute(&path, &RunOptions::default(), RunMode::Full).unwrap();
        let written = std::fs::read_to_string(dir.path().join("out/r.json")).unwrap();
        assert_eq!(RunReport::from_json(&written).unwrap(), report);
        assert!(dir.path().join("out/r.md").exists());

        let model = ModelDocument::load(dir.path().join("out/m.json")).unwrap();
        let input = "a,b,y\n3,3,1\n1.5,11,0\n";
        let (bytes, rows) = predict_csv(&model, input.as_bytes()).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(rows, 2);
        // k = 1 returns the label of the identical training row.
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("a,b,y,prediction,{PROBABILITY_COLUMN}"));
        assert!(lines[1].starts_with("3,3,1,0,"));
        assert!(lines[2].starts_with("1.5,11,0,1,"));

        let err = predict_csv(&model, b"a,y\n1,0\n").unwrap_err();
        assert!(err.to_string().contains('b'));
    }
}
