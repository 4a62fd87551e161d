//! End-to-end checks on the bundled diabetes table and shipped config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cmml_core::constraints::{self, Criterion, Status};
use cmml_core::learners::ModelDocument;
use cmml_core::pipeline::{self, predict_csv, PipelineConfig, RunMode, RunOptions, RunStatus};
use cmml_core::Dataset;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pima() -> Dataset {
    Dataset::load_csv(root().join("data/diabetes.csv"), &BTreeMap::new()).unwrap()
}

// (feature, mean, std, min, median, max) from the published descriptive table.
const REFERENCE: [(&str, f64, f64, f64, f64, f64); 9] = [
    ("Pregnancies", 3.84, 3.36, 0.0, 3.0, 17.0),
    ("Glucose", 120.89, 31.97, 0.0, 117.0, 199.0),
    ("BloodPressure", 69.10, 19.35, 0.0, 72.0, 122.0),
    ("SkinThickness", 20.53, 15.95, 0.0, 23.0, 99.0),
    ("Insulin", 79.79, 115.24, 0.0, 30.5, 846.0),
    ("BMI", 31.99, 7.88, 0.0, 32.0, 67.1),
    ("DiabetesPedigreeFunction", 0.47, 0.33, 0.078, 0.37, 2.42),
    ("Age", 33.24, 11.76, 21.0, 29.0, 81.0),
    ("Outcome", 0.34, 0.47, 0.0, 0.0, 1.0),
];

#[test]
fn descriptive_stats_match_reference() {
    let d = pima();
    assert_eq!(d.n_rows(), 768);
    assert_eq!(d.n_features(), 9);
    let stats = d.descriptive_stats();
    for (name, mean, std, min, median, max) in REFERENCE {
        let s = stats.get(name).unwrap();
        assert!((s.mean.unwrap() - mean).abs() <= 0.02, "{name} mean {:?}", s.mean);
        assert!((s.std.unwrap() - std).abs() <= 0.02, "{name} std {:?}", s.std);
        assert!((s.min.unwrap() - min).abs() <= 0.005);
        assert!((s.median.unwrap() - median).abs() <= 0.005);
        assert!((s.max.unwrap() - max).abs() <= 0.005);
    }
}

#[test]
fn shipped_constraints_on_raw_and_marked_data() {
    let d = pima();
    let doc = constraints::load(root().join("configs/pima.cmc")).unwrap();
    let raw = constraints::evaluate(&doc, &d).unwrap();
    let zero_glucose = d.numeric_column("Glucose").unwrap().iter().filter(|v| **v == Some(0.0)).count();
    assert_eq!(raw.get("Glucose").unwrap().status, Status::Fail);
    assert_eq!(raw.get("Glucose").unwrap().violating_rows.len(), zero_glucose);
    assert_eq!(raw.get("Age").unwrap().status, Status::Pass);
    assert_eq!(raw.get("diagnostic_glucose").unwrap().status, Status::Vacuous);

    let marked = d.mark_missing_zeros(&["Glucose".to_string()]).unwrap();
    let gated = constraints::evaluate(&doc, &marked).unwrap();
    assert_eq!(gated.get("Glucose").unwrap().status, Status::Pass);
    assert_eq!(gated.get("Glucose").unwrap().skipped_rows, zero_glucose);
}

#[test]
fn shipped_config_end_to_end() {
    let path = root().join("configs/pima.json");
    let mut cfg = PipelineConfig::load(&path).unwrap();
    cfg.diagnostics = None;
    let base = path.parent().unwrap();
    let out = pipeline::run(&cfg, base, &RunOptions::default(), RunMode::Full).unwrap();
    let r = &out.report;
    assert_eq!(r.data.rows, 768);
    assert_eq!(r.phases.len(), 7);
    assert!(r.leaderboard.iter().all(|e| e.score.is_some()));
    assert!(matches!(r.status, RunStatus::Success | RunStatus::GatesFailed));
    assert_eq!(r.constraints.outcomes.iter().find(|o| o.name == "Glucose").unwrap().raw_violations, 5);

    let md = r.to_markdown();
    for c in Criterion::ALL {
        assert!(md.contains(&format!("| {} |", c.label())), "missing row {}", c.label());
    }

    let model = out.model.unwrap();
    let text = std::fs::read(root().join("data/diabetes.csv")).unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&text).unwrap().lines().collect();
    let sample = lines[..4].join("\n") + "\n";
    let (bytes, rows) = predict_csv(&model, sample.as_bytes()).unwrap();
    assert_eq!(rows, 3);
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    for rec in reader.records() {
        let rec = rec.unwrap();
        let n = rec.len();
        let pred: f64 = rec[n - 2].parse().unwrap();
        let prob: f64 = rec[n - 1].parse().unwrap();
        assert!(pred == 0.0 || pred == 1.0);
        assert!((0.0..=1.0).contains(&prob));
    }

    let hundred = lines[..101].join("\n") + "\n";
    let reloaded = ModelDocument::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(
        predict_csv(&model, hundred.as_bytes()).unwrap(),
        predict_csv(&reloaded, hundred.as_bytes()).unwrap()
    );
}
