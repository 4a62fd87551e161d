//! Randomised invariants across the library, each run with a fixed seed.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use cmml_core::constraints::{self, Status};
use cmml_core::engineering::*;
use cmml_core::evaluation::*;
use cmml_core::learners::*;
use cmml_core::tabular::SplitFractions;
use cmml_core::{Cell, Dataset, FeatureKind, FeatureMeta, Matrix};

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn rows(n: std::ops::RangeInclusive<usize>, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-50i32..50, d), n)
        .prop_map(|r| r.into_iter().map(|row| row.into_iter().map(|v| v as f64 / 4.0).collect()).collect())
}

fn labelled(n: std::ops::RangeInclusive<usize>, d: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    rows(n, d).prop_flat_map(|x| {
        let n = x.len();
        (Just(x), prop::collection::vec(0u8..2, n).prop_map(|y| y.into_iter().map(f64::from).collect()))
    })
}

fn two_class(y: &[f64]) -> bool {
    y.contains(&0.0) && y.contains(&1.0)
}

fn numeric(cols: &[(&str, Vec<f64>)]) -> Dataset {
    let refs: Vec<(&str, &[f64])> = cols.iter().map(|(n, v)| (*n, v.as_slice())).collect();
    Dataset::from_numeric(&refs).unwrap()
}

fn with_missing(values: &[Option<f64>]) -> Dataset {
    let cells = values.iter().map(|v| v.map_or(Cell::Missing, Cell::Num)).collect();
    let ids = (0..values.len()).map(|i| Cell::Num(i as f64)).collect();
    Dataset::from_columns(vec![(FeatureMeta::numeric("a"), cells), (FeatureMeta::numeric("id"), ids)]).unwrap()
}

fn gini_of(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    1.0 - counts.iter().map(|c| (*c as f64 / n).powi(2)).sum::<f64>()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn split_partitions_rows(n in 1usize..60, train in 10u32..80, val in 1u32..20, seed in any::<u64>()) {
        let ids: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let d = numeric(&[("id", ids)]);
        let f = SplitFractions::new(train as f64 / 100.0, val as f64 / 100.0, (100 - train - val) as f64 / 100.0).unwrap();
        let (a, b, c) = d.split(f, seed).unwrap();
        let mut seen: Vec<f64> = [a, b, c]
            .iter()
            .flat_map(|p| p.numeric_column("id").unwrap().into_iter().map(Option::unwrap))
            .collect();
        seen.sort_by(f64::total_cmp);
        prop_assert_eq!(seen, (0..n).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn stats_ignore_row_order(values in prop::collection::vec(prop::option::weighted(0.8, -100i32..100), 2..40), seed in any::<u64>()) {
        let values: Vec<Option<f64>> = values.into_iter().map(|v| v.map(f64::from)).collect();
        let d = with_missing(&values);
        let mut perm: Vec<usize> = (0..values.len()).collect();
        use rand::{seq::SliceRandom, SeedableRng};
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = d.descriptive_stats();
        let b = d.select_rows(&perm).descriptive_stats();
        for (x, y) in a.features.iter().zip(&b.features) {
            prop_assert_eq!(x.non_missing, y.non_missing);
            for (u, v) in [(x.mean, y.mean), (x.std, y.std), (x.min, y.min), (x.median, y.median), (x.max, y.max)] {
                prop_assert_eq!(u.is_some(), v.is_some());
                if let (Some(u), Some(v)) = (u, v) {
                    prop_assert!(close(u, v, 1e-12));
                }
            }
            if let (Some(lo), Some(hi)) = (x.min, x.max) {
                let distinct = values.iter().flatten().any(|v| *v != lo);
                prop_assert_eq!(distinct, lo < hi);
            }
        }
    }

    #[test]
    fn zero_marking_is_idempotent(values in prop::collection::vec(-3i32..3, 1..30)) {
        let d = numeric(&[("a", values.into_iter().map(f64::from).collect())]);
        let names = vec!["a".to_string()];
        let once = d.mark_missing_zeros(&names).unwrap();
        prop_assert_eq!(once.mark_missing_zeros(&names).unwrap(), once);
    }

    #[test]
    fn range_fails_exactly_at_or_below_bound(values in prop::collection::vec(prop::option::weighted(0.8, -20i32..20), 1..40), c in -10i32..10) {
        let values: Vec<Option<f64>> = values.into_iter().map(|v| v.map(f64::from)).collect();
        let d = with_missing(&values);
        let doc = constraints::parse(&format!("range a: > {c}")).unwrap();
        let r = constraints::evaluate(&doc, &d).unwrap();
        let expected: Vec<usize> = values.iter().enumerate().filter(|(_, v)| matches!(v, Some(v) if *v <= c as f64)).map(|(i, _)| i).collect();
        prop_assert_eq!(&r.statements[0].violating_rows, &expected);
        prop_assert_eq!(r.statements[0].skipped_rows, values.iter().filter(|v| v.is_none()).count());
    }

    #[test]
    fn evaluation_follows_row_permutations(x in rows(1..=30, 2), seed in any::<u64>()) {
        let d = numeric(&[("a", x.iter().map(|r| r[0]).collect()), ("b", x.iter().map(|r| r[1]).collect())]);
        let doc = constraints::parse("range a: > 0\nrule r: a > 1 implies b < 2\ninvariant m: mean(a) < 3").unwrap();
        let mut perm: Vec<usize> = (0..x.len()).collect();
        use rand::{seq::SliceRandom, SeedableRng};
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let base = constraints::evaluate(&doc, &d).unwrap();
        prop_assert_eq!(&constraints::evaluate(&doc, &d).unwrap(), &base);
        let moved = constraints::evaluate(&doc, &d.select_rows(&perm)).unwrap();
        for (s, m) in base.statements.iter().zip(&moved.statements) {
            prop_assert_eq!(s.status, m.status);
            let mut mapped: Vec<usize> = m.violating_rows.iter().map(|&i| perm[i]).collect();
            mapped.sort_unstable();
            prop_assert_eq!(&mapped, &s.violating_rows);
        }
    }

    #[test]
    fn derived_columns_agree_with_their_expression(x in rows(1..=30, 2)) {
        let d = numeric(&[("a", x.iter().map(|r| r[0]).collect()), ("b", x.iter().map(|r| r[1]).collect())]);
        let doc = constraints::parse("derive k: a > 1 and not b < 0 or a < -5").unwrap();
        let derived = constraints::derive_features(&doc, &d).unwrap();
        let check = constraints::parse(
            "rule fwd: k == 1 implies (a > 1 and not b < 0 or a < -5)\nrule back: (a > 1 and not b < 0 or a < -5) implies k == 1",
        ).unwrap();
        let r = constraints::evaluate(&check, &derived).unwrap();
        for s in &r.statements {
            prop_assert!(s.status != Status::Fail, "{} violated", s.name);
        }
    }

    #[test]
    fn scaling_bounds_and_moments(x in rows(2..=40, 1)) {
        let col: Vec<f64> = x.iter().map(|r| r[0]).collect();
        prop_assume!(col.iter().any(|v| *v != col[0]));
        let d = numeric(&[("a", col)]);
        let before = d.clone();
        let names = vec!["a".to_string()];
        let (mm, _) = scale(&d, &names, ScaleMethod::Minmax).unwrap();
        prop_assert!(mm.numeric_column("a").unwrap().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        let (z, _) = scale(&d, &names, ScaleMethod::Zscore).unwrap();
        let v: Vec<f64> = z.numeric_column("a").unwrap().into_iter().flatten().collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        prop_assert!(mean.abs() < 1e-9 && (std - 1.0).abs() < 1e-9);
        prop_assert_eq!(d, before);
    }

    #[test]
    fn imputation_touches_only_missing(values in prop::collection::vec(prop::option::weighted(0.7, -20i32..20), 1..30)) {
        let values: Vec<Option<f64>> = values.into_iter().map(|v| v.map(f64::from)).collect();
        prop_assume!(values.iter().any(Option::is_some));
        let d = with_missing(&values);
        for strategy in [ImputeStrategy::Mean, ImputeStrategy::Median, ImputeStrategy::MostFrequent, ImputeStrategy::Constant(7.0)] {
            let out = impute(&d, "a", strategy).unwrap();
            let filled = out.numeric_column("a").unwrap();
            for (orig, new) in values.iter().zip(&filled) {
                prop_assert!(new.is_some());
                if orig.is_some() {
                    prop_assert_eq!(orig, new);
                }
            }
        }
    }

    #[test]
    fn one_hot_rows_sum_to_one(tokens in prop::collection::vec(prop::option::weighted(0.85, 0usize..4), 1..30)) {
        let names = ["red", "green", "blue", "grey"];
        let cells = tokens.iter().map(|t| t.map_or(Cell::Missing, |i| Cell::Cat(names[i].into()))).collect();
        let d = Dataset::from_columns(vec![(FeatureMeta::new("c", FeatureKind::Categorical), cells)]).unwrap();
        let out = one_hot(&d, "c").unwrap();
        let encoded: Vec<String> = out.feature_names().into_iter().filter(|n| n.starts_with("c=")).map(String::from).collect();
        for (i, t) in tokens.iter().enumerate() {
            let sum: f64 = encoded.iter().map(|f| out.numeric_column(f).unwrap()[i].unwrap_or(0.0)).sum();
            prop_assert_eq!(sum, if t.is_some() { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn dpf_monotone(ages in prop::collection::vec(1.0f64..88.0, 0..6), extra in 1.0f64..88.0, bump in 0.0f64..30.0, others in prop::collection::vec(15.0f64..100.0, 0..4)) {
        let kin = Kinship::ParentOrFullSibling;
        let mut rel: Vec<RelativeRecord> = ages.iter().map(|a| RelativeRecord::diabetic(kin, *a).unwrap()).collect();
        rel.extend(others.iter().map(|a| RelativeRecord::non_diabetic(Kinship::HalfAuntHalfUncleCousin, *a).unwrap()));
        let base = dpf(&rel);
        let mut more = rel.clone();
        more.push(RelativeRecord::diabetic(kin, extra).unwrap());
        prop_assert!(dpf(&more) >= base - 1e-12);
        let later = (extra + bump).min(88.0);
        let mut older = rel.clone();
        older.push(RelativeRecord::diabetic(kin, later).unwrap());
        prop_assert!(dpf(&older) <= dpf(&more) + 1e-12);
    }

    #[test]
    fn analytic_gradients_match_differences((x, y) in labelled(3..=12, 3), w in prop::collection::vec(-1.0f64..1.0, 4)) {
        let m = Matrix::from_rows(&x).unwrap();
        let objectives: [&dyn Objective; 2] = [&linear::SquaredObjective { x: &m, y: &y }, &linear::LogLikelihoodObjective { x: &m, y: &y }];
        for obj in objectives {
            let analytic = obj.gradient(&w);
            let numeric = gd::numerical_gradient(obj, &w, 1e-5);
            for (a, n) in analytic.iter().zip(&numeric) {
                prop_assert!((a - n).abs() <= 1e-5 * a.abs().max(1.0), "{a} vs {n}");
            }
        }
    }

    #[test]
    fn kmeans_objective_never_rises(x in rows(4..=40, 2), k in 1usize..4, seed in any::<u64>()) {
        let m = Matrix::from_rows(&x).unwrap();
        if let Ok(model) = kmeans(&m, &KmeansParams { k, seed, ..Default::default() }) {
            for w in model.objective_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn cart_split_matches_exhaustive_search((x, y) in labelled(2..=20, 3)) {
        let m = Matrix::from_rows(&x).unwrap();
        let rows: Vec<usize> = (0..x.len()).collect();
        let got = best_split(&m, &y, &rows, Impurity::Gini, 2, 1);
        let mut oracle: Option<(f64, usize, f64)> = None;
        for f in 0..3 {
            let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for pair in vals.windows(2) {
                let t = (pair[0] + pair[1]) / 2.0;
                let (mut l, mut r) = ([0usize; 2], [0usize; 2]);
                for (row, label) in x.iter().zip(&y) {
                    let side = if row[f] <= t { &mut l } else { &mut r };
                    side[*label as usize] += 1;
                }
                let (nl, nr) = ((l[0] + l[1]) as f64, (r[0] + r[1]) as f64);
                let imp = (nl * gini_of(l) + nr * gini_of(r)) / (nl + nr);
                if oracle.is_none_or(|(best, _, _)| imp < best - 1e-12) {
                    oracle = Some((imp, f, t));
                }
            }
        }
        match (got, oracle) {
            (None, None) => {}
            (Some(s), Some((imp, f, t))) => {
                prop_assert!((s.impurity - imp).abs() < 1e-9);
                prop_assert_eq!(s.feature, f);
                prop_assert_eq!(s.threshold, t);
            }
            (g, o) => prop_assert!(false, "split {g:?} vs oracle {o:?}"),
        }
    }

    #[test]
    fn cart_labels_survive_positive_rescaling((x, y) in labelled(2..=30, 2), c in 0.1f64..20.0) {
        prop_assume!(two_class(&y));
        let m = Matrix::from_rows(&x).unwrap();
        let scaled = m.map(|v| v * c);
        let params = CartParams { max_depth: 4, ..Default::default() };
        let a = fit_cart(&m, &y, &params).unwrap().predict(&m);
        let b = fit_cart(&scaled, &y, &params).unwrap().predict(&scaled);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn accepted_stumps_beat_chance((x, y) in labelled(4..=40, 2), seed in any::<u64>()) {
        prop_assume!(two_class(&y));
        let m = Matrix::from_rows(&x).unwrap();
        let model = fit_adaboost(&m, &y, &AdaBoostParams { rounds: 10, seed, ..Default::default() }).unwrap();
        for s in model.stumps.iter().filter(|s| s.accepted) {
            prop_assert!(s.error < 0.5);
        }
    }

    #[test]
    fn boosting_training_error_never_rises(x in rows(4..=30, 2), eta in 0.05f64..1.0) {
        let m = Matrix::from_rows(&x).unwrap();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 2.0 - r[1] + (r[0] > 0.0) as u8 as f64).collect();
        let params = GbmParams { n_trees: 15, max_depth: 2, learning_rate: eta, task: GbmTask::Regression, ..Default::default() };
        let model = fit_gbm(&m, &y, &params).unwrap();
        let mse = |t: usize| x.iter().zip(&y).map(|(r, v)| (model.staged_raw(r, t) - v).powi(2)).sum::<f64>();
        for t in 0..15 {
            prop_assert!(mse(t + 1) <= mse(t) * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn seeded_fits_serialise_identically((x, y) in labelled(4..=30, 2), seed in any::<u64>()) {
        prop_assume!(two_class(&y));
        let m = Matrix::from_rows(&x).unwrap();
        for spec in [
            ModelSpec::Adaboost(AdaBoostParams { rounds: 5, seed, ..Default::default() }),
            ModelSpec::Kmeans(KmeansParams { k: 2, seed, ..Default::default() }),
            ModelSpec::Logistic(LogisticParams { gd: GDConfig { seed, max_iters: 50, ..Default::default() }, ..Default::default() }),
        ] {
            let a = spec.fit(&m, &y).map(|t| serde_json::to_string(&t).unwrap());
            let b = spec.fit(&m, &y).map(|t| serde_json::to_string(&t).unwrap());
            prop_assert_eq!(a.ok(), b.ok());
        }
    }

    #[test]
    fn confusion_identities(tp in 0usize..200, fp in 0usize..200, tn in 0usize..200, fn_ in 0usize..200) {
        let m = classification_metrics(&ConfusionMatrix { tp, fp, tn, fn_ });
        if let Some(s) = m.sensitivity {
            let back = s * (tp + fn_) as f64;
            prop_assert!((back - tp as f64).abs() < 1e-9 && back.round() as usize == tp);
        }
        if let (Some(p), Some(r), Some(f)) = (m.precision, m.recall, m.f1) {
            prop_assert!(p.min(r) - 1e-12 <= f && f <= p.max(r) + 1e-12);
        }
    }

    #[test]
    fn divergence_is_cross_entropy_minus_entropy(p in prop::collection::vec(0.01f64..1.0, 2..8), q_raw in prop::collection::vec(0.01f64..1.0, 8)) {
        let norm = |v: &[f64]| { let s: f64 = v.iter().sum(); v.iter().map(|x| x / s).collect::<Vec<_>>() };
        let p = norm(&p);
        let q = norm(&q_raw[..p.len()]);
        let (h, kl) = cross_entropy_kl(&p, &q).unwrap();
        prop_assert!(kl >= -1e-12);
        prop_assert!((kl - (h - entropy(&p))).abs() < 1e-9);
        prop_assert!(cross_entropy_kl(&p, &p).unwrap().1.abs() < 1e-12);
    }

    #[test]
    fn folds_are_balanced_partitions(n in 2usize..200, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = fold_assignment(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn r2_bounds(y in prop::collection::vec(-50i32..50, 2..40), pred in prop::collection::vec(-50i32..50, 40)) {
        let y: Vec<f64> = y.into_iter().map(f64::from).collect();
        prop_assume!(y.iter().any(|v| *v != y[0]));
        let pred: Vec<f64> = pred[..y.len()].iter().map(|v| f64::from(*v)).collect();
        prop_assert!(r2(&y, &pred).unwrap() <= 1.0);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        prop_assert!(r2(&y, &vec![mean; y.len()]).unwrap().abs() < 1e-12);
    }
}

#[test]
fn ridge_shrinks_weights() {
    let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 0.5], [3.0, 1.0], [4.0, 3.0], [5.0, 2.5], [6.0, 0.0]]).unwrap();
    let y = [3.1, 2.4, 4.2, 7.1, 7.4, 5.9];
    let norms: Vec<f64> = [0.0, 0.5, 2.0]
        .iter()
        .map(|&l2| {
            let cfg = GDConfig { l2, step_size: 0.02, max_iters: 20_000, tolerance: 1e-9, ..Default::default() };
            let m = fit_linear(&x, &y, &cfg).unwrap();
            m.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
        })
        .collect();
    assert!(norms[0] > norms[1] && norms[1] > norms[2], "{norms:?}");
}

#[test]
fn leaderboard_scores_match_individual_runs() {
    let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| f64::from(*v as i32 % 3 == 0)).collect();
    let d = numeric(&[("x", x), ("y", y)]).with_target("y").unwrap();
    let recipe = EngineeringRecipe::default();
    let ctx = EvalContext::new(&recipe, None);
    let candidates: Vec<Candidate> = [1, 3, 5]
        .iter()
        .map(|&k| Candidate::new(ModelSpec::Knn(KnnParams { k, ..Default::default() }), None))
        .collect();
    let grid = grid_search(&d, &candidates, Metric::Accuracy, &ctx, 3, 5).unwrap();
    let mut from_grid: Vec<f64> = grid.leaderboard.iter().map(|e| e.score.unwrap()).collect();
    let mut direct: Vec<f64> = candidates
        .iter()
        .map(|c| kfold_cv(&d, c, &ctx, 3, 5).unwrap().summary.mean.accuracy.unwrap())
        .collect();
    from_grid.sort_by(f64::total_cmp);
    direct.sort_by(f64::total_cmp);
    assert_eq!(from_grid, direct);
}

const FEATURES: [&str; 4] = ["age", "glucose", "bmi_2", "Outcome"];
const CMP: [&str; 6] = [">", ">=", "<", "<=", "==", "!="];

fn number() -> impl Strategy<Value = String> {
    (-400i32..400, 0u32..3).prop_map(|(v, scale)| (v as f64 / 10f64.powi(scale as i32)).to_string())
}

fn operand() -> impl Strategy<Value = String> {
    prop_oneof![prop::sample::select(&FEATURES[..]).prop_map(String::from), number()]
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (operand(), prop::sample::select(&CMP[..]), operand()).prop_map(|(a, op, b)| format!("{a} {op} {b}")),
        prop::sample::select(&FEATURES[..]).prop_map(|f| format!("missing({f})")),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("not ({e})")),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| format!("({})", v.join(" and "))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| format!("({})", v.join(" or "))),
            (inner.clone(), inner).prop_map(|(a, b)| format!("(({a}) implies ({b}))")),
        ]
    })
}

fn statement(i: usize) -> impl Strategy<Value = String> {
    const AGGS: [&str; 6] = ["mean", "std", "min", "max", "count", "frac_missing"];
    prop_oneof![
        prop::collection::vec((prop::sample::select(&CMP[..4]), number()), 1..3)
            .prop_map(move |bounds| {
                let f = FEATURES[i];
                let b: Vec<String> = bounds.into_iter().map(|(op, v)| format!("{op} {v}")).collect();
                format!("range {f}: {}", b.join(", "))
            }),
        expr().prop_map(move |e| format!("rule r{i}: {e}")),
        expr().prop_map(move |e| format!("derive d{i}: {e}")),
        (prop::sample::select(&AGGS[..]), prop::sample::select(&FEATURES[..]), prop::sample::select(&CMP[..]), number())
            .prop_map(move |(a, f, op, v)| format!("invariant v{i}: {a}({f}) {op} {v}")),
        (expr(), prop::sample::select(&CMP[..]), number())
            .prop_map(move |(e, op, v)| format!("invariant w{i}: frac({e}) {op} {v}")),
    ]
}

fn document() -> impl Strategy<Value = String> {
    (1usize..=FEATURES.len())
        .prop_flat_map(|n| (0..n).map(statement).collect::<Vec<_>>())
        .prop_map(|lines| lines.join("\n# note\n") + "\n")
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn printing_then_parsing_is_stable(text in document()) {
        let first = constraints::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let printed = first.to_string();
        let second = constraints::parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(second.to_string(), printed);
    }
}
