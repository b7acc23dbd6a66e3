//! End-to-end acceptance checks on the bundled credit (HELOC-style) and
//! heart-disease datasets. Every test prints one `ACCEPTANCE <name>: PASS|FAIL`
//! line with the measured values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use cfscope_core::aggregate::aggregate_transitions;
use cfscope_core::cohort::{
    apply_filterset, sort_features, summarize_cohort, ConfidenceRange, FilterSet, RangeClause, SortKey,
};
use cfscope_core::data::{load_csv, Dataset, FeatureKind, SchemaSpec, Value};
use cfscope_core::discretize::{DiscretizationScheme, FeatureBinning, DEFAULT_BIN_COUNT};
use cfscope_core::engine::{
    generate_batch, generate_batch_parallel, AlgorithmConfig, CandidateMove, CounterfactualExplanation, FeatureChange,
};
use cfscope_core::export::to_jsonl_string;
use cfscope_core::predictor::{
    confusion_matrix, train_logistic, ConfusionCell, DecisionConfig, LinearModel, PredictionCache, Predictor,
    TrainConfig,
};
use cfscope_core::session::{ModelSpec, SchemaSource, Session, SessionSpec};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const HELOC: &str = "heloc_like";
const HEART: &str = "heart";
const ERE: &str = "External Risk Estimate";

fn data_path(name: &str, ext: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.{ext}"))
}

fn report(name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("ACCEPTANCE {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

/// A dataset with the default logistic baseline and default search settings.
struct Fixture {
    dataset: Dataset<f64>,
    model: LinearModel<f64>,
    scheme: DiscretizationScheme<f64>,
    config: AlgorithmConfig,
    decision: DecisionConfig<f64>,
    cache: PredictionCache<f64>,
    explanations: Vec<CounterfactualExplanation<f64>>,
}

fn build_fixture(name: &str) -> Fixture {
    let spec = SchemaSpec::from_json_file(data_path(name, "schema.json")).unwrap();
    let dataset: Dataset<f64> = load_csv(data_path(name, "csv"), &spec).unwrap();
    let model = train_logistic(&dataset, &TrainConfig::default()).unwrap();
    let scheme = DiscretizationScheme::fit(&dataset, DEFAULT_BIN_COUNT).unwrap();
    let config = AlgorithmConfig::default();
    let decision = DecisionConfig::default();
    let cache = PredictionCache::build(&dataset, &model, &decision).unwrap();
    let rows: Vec<usize> = (0..dataset.len()).collect();
    let explanations = generate_batch_parallel(&dataset, &rows, &model, &scheme, &config, &decision).unwrap();
    Fixture {
        dataset,
        model,
        scheme,
        config,
        decision,
        cache,
        explanations,
    }
}

fn heloc() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build_fixture(HELOC))
}

fn heart() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build_fixture(HEART))
}

fn success_rate(f: &Fixture) -> f64 {
    f.explanations.iter().filter(|e| e.success).count() as f64 / f.explanations.len() as f64
}

fn violations(f: &Fixture, explanations: &[CounterfactualExplanation<f64>], config: &AlgorithmConfig) -> usize {
    explanations
        .iter()
        .filter(|e| {
            e.changes.len() > config.max_changed_features
                || e.changes.iter().any(|c| {
                    config.locked_features.contains(&c.feature())
                        || match *c {
                            FeatureChange::Continuous { from_bin, to_bin, .. } => {
                                from_bin.abs_diff(to_bin) > config.max_bin_displacement
                                    || f.scheme
                                        .bin_of(
                                            e.apply_to(&f.dataset.rows()[e.row_id].values)[c.feature()]
                                                .as_num()
                                                .unwrap(),
                                            c.feature(),
                                        )
                                        .unwrap()
                                        != to_bin
                            }
                            FeatureChange::Categorical { .. } => false,
                        }
                })
        })
        .count()
}

#[test]
fn flip_validity() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, f) in [(HELOC, heloc()), (HEART, heart())] {
        let mut successes = 0;
        let mut bad = 0;
        for e in &f.explanations {
            if !e.success {
                continue;
            }
            successes += 1;
            let original = &f.dataset.rows()[e.row_id].values;
            let p = f.model.predict_proba(&e.apply_to(original)).unwrap();
            if f.decision.decide(p) == f.decision.decide(f.cache.entries[e.row_id].probability) {
                bad += 1;
            }
        }
        pass &= bad == 0 && successes > 0;
        lines.push(format!("{name}: {successes} successes, {bad} non-flipping"));
    }
    report("flip_validity", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn constraint_compliance() {
    let f = heloc();
    let mut total = violations(f, &f.explanations, &f.config);
    let mut detail = vec![format!("default w=5 l=4: {} explanations", f.explanations.len())];

    // Tighter settings with a locked feature, on both datasets.
    for (name, f) in [(HELOC, heloc()), (HEART, heart())] {
        let locked = f
            .dataset
            .feature_index(if name == HELOC { ERE } else { "thal" })
            .unwrap();
        let config = AlgorithmConfig::new(2, 1).with_locked([locked]);
        let rows: Vec<usize> = (0..f.dataset.len()).collect();
        let out = generate_batch_parallel(&f.dataset, &rows, &f.model, &f.scheme, &config, &f.decision).unwrap();
        total += violations(f, &out, &config);
        detail.push(format!("{name} w=2 l=1 locked {locked}: {} explanations", out.len()));
    }
    report(
        "constraint_compliance",
        total == 0,
        format!("{total} violations; {}", detail.join("; ")),
    );
    assert_eq!(total, 0);
}

/// Admissible next states, enumerated directly from the rules.
fn brute_force_states(
    current: &[Value<f64>],
    original: &[Value<f64>],
    scheme: &DiscretizationScheme<f64>,
    config: &AlgorithmConfig,
) -> Vec<Vec<Value<f64>>> {
    let cell = |v: &Value<f64>, f: usize| scheme.cell_of(v, f).unwrap();
    let changed = (0..current.len())
        .filter(|&f| match scheme.features[f] {
            FeatureBinning::Continuous(_) | FeatureBinning::Categorical { .. } => {
                cell(&current[f], f) != cell(&original[f], f)
            }
            FeatureBinning::Degenerate { .. } => false,
        })
        .count();
    let mut out = Vec::new();
    for f in 0..current.len() {
        if config.locked_features.contains(&f) {
            continue;
        }
        if matches!(scheme.features[f], FeatureBinning::Degenerate { .. }) {
            continue;
        }
        let is_changed = cell(&current[f], f) != cell(&original[f], f);
        match &scheme.features[f] {
            FeatureBinning::Continuous(bins) => {
                let (b, b0) = (cell(&current[f], f), cell(&original[f], f));
                for to in [b.checked_sub(1), Some(b + 1)].into_iter().flatten() {
                    if to >= bins.bin_count || to.abs_diff(b0) > config.max_bin_displacement {
                        continue;
                    }
                    if !is_changed && to != b0 && changed >= config.max_changed_features {
                        continue;
                    }
                    let mut s = current.to_vec();
                    s[f] = if to == b0 {
                        original[f]
                    } else {
                        Value::Num(bins.representative(to))
                    };
                    out.push(s);
                }
            }
            FeatureBinning::Categorical { categories, .. } => {
                if is_changed || changed >= config.max_changed_features {
                    continue;
                }
                for c in 0..categories.len() {
                    if Value::Cat(c) != original[f] {
                        let mut s = current.to_vec();
                        s[f] = Value::Cat(c);
                        out.push(s);
                    }
                }
            }
            FeatureBinning::Degenerate { .. } => {}
        }
    }
    out
}

fn replay(state: &mut [Value<f64>], original: &[Value<f64>], mv: &CandidateMove, scheme: &DiscretizationScheme<f64>) {
    match *mv {
        CandidateMove::Bin { feature, to_bin, .. } => {
            let bins = scheme.bins(feature).unwrap();
            state[feature] = if scheme.cell_of(&original[feature], feature).unwrap() == to_bin {
                original[feature]
            } else {
                Value::Num(bins.representative(to_bin))
            };
        }
        CandidateMove::Category {
            feature, to_category, ..
        } => state[feature] = Value::Cat(to_category),
    }
}

fn oracle_check(f: &Fixture, rows: &[usize]) -> (usize, f64) {
    let explanations = generate_batch(&f.dataset, rows, &f.model, &f.scheme, &f.config, &f.decision).unwrap();
    let mut steps = 0;
    let mut worst: f64 = 0.0;
    for e in &explanations {
        let original = &f.dataset.rows()[e.row_id].values;
        let toward_positive = e.original_decision == 0;
        let mut state = original.clone();
        let mut p = e.original_prob;
        for step in &e.trace {
            let best = brute_force_states(&state, original, &f.scheme, &f.config)
                .iter()
                .map(|s| {
                    let q = f.model.predict_proba(s).unwrap();
                    if toward_positive {
                        q - p
                    } else {
                        p - q
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max((step.improvement - best).abs());
            replay(&mut state, original, &step.candidate, &f.scheme);
            p = f.model.predict_proba(&state).unwrap();
            worst = worst.max((p - step.probability).abs());
            steps += 1;
        }
        // A non-flipping search stopped because nothing improves further (or
        // no moves or step budget remained).
        if !e.success && e.stop_reason == cfscope_core::StopReason::NoImprovement {
            let best = brute_force_states(&state, original, &f.scheme, &f.config)
                .iter()
                .map(|s| {
                    let q = f.model.predict_proba(s).unwrap();
                    if toward_positive {
                        q - p
                    } else {
                        p - q
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best <= 0.0, "row {}: improving move {best} left on the table", e.row_id);
        }
    }
    (steps, worst)
}

#[test]
fn greedy_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let heloc_rows: Vec<usize> = (0..heloc().dataset.len())
        .collect::<Vec<_>>()
        .choose_multiple(&mut rng, 200)
        .copied()
        .collect();
    let heart_rows: Vec<usize> = (0..heart().dataset.len())
        .collect::<Vec<_>>()
        .choose_multiple(&mut rng, 100)
        .copied()
        .collect();
    // Fixture construction is excluded from the budget.
    let start_checks = Instant::now();
    let (s1, w1) = oracle_check(heloc(), &heloc_rows);
    let (s2, w2) = oracle_check(heart(), &heart_rows);
    let elapsed = start_checks.elapsed().as_secs_f64();
    let worst = w1.max(w2);
    let pass = worst <= 1e-9 && elapsed < 30.0 && s1 > 0 && s2 > 0;
    report(
        "greedy_oracle_equivalence",
        pass,
        format!(
            "200 credit rows ({s1} steps) + 100 heart rows ({s2} steps), max |delta| {worst:.3e}, {elapsed:.2}s checks, {:.2}s total",
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(worst <= 1e-9, "max deviation {worst}");
    assert!(elapsed < 30.0, "took {elapsed}s");
}

#[test]
fn discretizer_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let samples: Vec<Vec<f64>> = (0..10_000).map(|_| vec![StandardNormal.sample(&mut rng)]).collect();
    let labels = (0..samples.len()).map(|i| (i % 2) as u8).collect();
    let ds = Dataset::from_numeric(["z"], samples.clone(), labels).unwrap();
    let n = 10;
    let scheme = DiscretizationScheme::fit(&ds, n).unwrap();
    let bins = scheme.bins(0).unwrap();

    // Independent two-pass population moments.
    let xs: Vec<f64> = samples.iter().map(|r| r[0]).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let std = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64).sqrt();
    let expected: Vec<f64> = (0..n - 1)
        .map(|i| mean + std * (4.0 * i as f64 / (n - 2) as f64 - 2.0))
        .collect();
    let edges_exact = bins.mean == mean && bins.std == std && bins.inner_edges == expected;

    let hist = scheme.histogram(&ds.column(0).collect::<Vec<_>>(), 0).unwrap();
    let middle = hist[1..n - 1].iter().sum::<usize>() as f64 / xs.len() as f64 * 100.0;
    let mass_ok = (middle - 95.45).abs() <= 1.0;
    report(
        "discretizer_mass",
        edges_exact && mass_ok,
        format!("middle 8 bins {middle:.2}% (target 95.45 +/- 1.0), edges exact: {edges_exact}, histogram {hist:?}"),
    );
    assert!(edges_exact);
    assert!(mass_ok, "middle mass {middle}");
}

#[test]
fn aggregation_conservation() {
    let f = heloc();
    let predicted_negative: Vec<usize> =
        apply_filterset(&f.dataset, &f.cache, &FilterSet::predicted_negative()).unwrap();
    let cohort: Vec<&CounterfactualExplanation<f64>> = predicted_negative.iter().map(|&r| &f.explanations[r]).collect();
    let agg = aggregate_transitions(cohort.iter().copied()).unwrap();

    // Flat recount over the exported lines.
    let export = to_jsonl_string(f.dataset.schema(), cohort.iter().copied());
    let mut recount: BTreeMap<String, usize> = BTreeMap::new();
    let mut lines = 0;
    for line in export.lines() {
        lines += 1;
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["success"].as_bool().unwrap() {
            for c in v["changes"].as_array().unwrap() {
                *recount.entry(c["feature"].as_str().unwrap().to_string()).or_default() += 1;
            }
        }
    }
    let mut mismatches = 0;
    for (i, feat) in f.dataset.schema().iter().enumerate() {
        if agg.feature_total(i) != recount.get(&feat.name).copied().unwrap_or(0) {
            mismatches += 1;
        }
    }
    let transitions: usize = recount.values().sum();

    let cm = confusion_matrix(&f.cache);
    let heart_cm = confusion_matrix(&heart().cache);
    let cells_ok = cm.total() == f.dataset.len() && heart_cm.total() == heart().dataset.len();
    let pass = mismatches == 0 && lines == cohort.len() && cells_ok && agg.positive_origin.total() == 0;
    report(
        "aggregation_conservation",
        pass,
        format!(
            "{} negative-origin explanations, {transitions} transitions, {mismatches} feature mismatches; confusion {:?} sums to {} of {}",
            cohort.len(),
            cm,
            cm.total(),
            f.dataset.len()
        ),
    );
    assert_eq!(mismatches, 0);
    assert!(cells_ok);
    assert!(pass);
}

fn random_filter(rng: &mut ChaCha8Rng, ds: &Dataset<f64>) -> FilterSet<f64> {
    let (mut lo, mut hi): (f64, f64) = (rng.random(), rng.random());
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut filter = FilterSet::all();
    if rng.random_bool(0.7) {
        filter.confidence = ConfidenceRange { low: lo, high: hi };
    }
    let all_cells = [
        ConfusionCell::TP,
        ConfusionCell::FP,
        ConfusionCell::TN,
        ConfusionCell::FN,
    ];
    filter.cells = all_cells.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    for _ in 0..rng.random_range(0..3) {
        filter.ranges.push(random_clause(rng, ds));
    }
    filter
}

fn random_clause(rng: &mut ChaCha8Rng, ds: &Dataset<f64>) -> RangeClause<f64> {
    let feature = rng.random_range(0..ds.n_features());
    let schema = ds.feature(feature);
    match schema.kind {
        FeatureKind::Continuous => {
            let col: Vec<f64> = ds.column(feature).filter_map(|v| v.as_num()).collect();
            let (a, b) = (*col.choose(rng).unwrap(), *col.choose(rng).unwrap());
            RangeClause::Numeric {
                feature,
                low: a.min(b),
                high: a.max(b),
            }
        }
        FeatureKind::Categorical => {
            let mut cats = schema.categories.clone();
            cats.shuffle(rng);
            let keep = rng.random_range(1..=cats.len());
            RangeClause::Categories {
                feature,
                allowed: cats.into_iter().take(keep).collect(),
            }
        }
    }
}

/// Explicit conjunction, or `None` when the conjunction is unsatisfiable
/// (disjoint confidence intervals or confusion cells).
fn conjunction(a: &FilterSet<f64>, b: &FilterSet<f64>) -> Option<FilterSet<f64>> {
    let low = a.confidence.low.max(b.confidence.low);
    let high = a.confidence.high.min(b.confidence.high);
    if low > high {
        return None;
    }
    let cells: BTreeSet<ConfusionCell> = match (a.cells.is_empty(), b.cells.is_empty()) {
        (true, _) => b.cells.clone(),
        (_, true) => a.cells.clone(),
        _ => {
            let both: BTreeSet<_> = a.cells.intersection(&b.cells).copied().collect();
            if both.is_empty() {
                return None;
            }
            both
        }
    };
    Some(FilterSet {
        confidence: ConfidenceRange { low, high },
        cells,
        ranges: a.ranges.iter().chain(&b.ranges).cloned().collect(),
        hidden: false,
    })
}

#[test]
fn cohort_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut failures = 0;
    let mut checked = 0;
    let mut nonempty = 0;
    for i in 0..100 {
        // Alternate datasets so categorical clauses are exercised too.
        let f = if i % 2 == 0 { heart() } else { heloc() };
        let (a, b) = (random_filter(&mut rng, &f.dataset), random_filter(&mut rng, &f.dataset));
        let ra: BTreeSet<usize> = apply_filterset(&f.dataset, &f.cache, &a).unwrap().into_iter().collect();
        let rb: BTreeSet<usize> = apply_filterset(&f.dataset, &f.cache, &b).unwrap().into_iter().collect();
        let inter: Vec<usize> = ra.intersection(&rb).copied().collect();
        let conj = match conjunction(&a, &b) {
            Some(c) => apply_filterset(&f.dataset, &f.cache, &c).unwrap(),
            None => Vec::new(),
        };
        if conj != inter {
            failures += 1;
        }
        nonempty += usize::from(!inter.is_empty());

        let narrowed = a.clone().with_range(random_clause(&mut rng, &f.dataset));
        let rn = apply_filterset(&f.dataset, &f.cache, &narrowed).unwrap();
        if !rn.iter().all(|r| ra.contains(r)) || rn.len() > ra.len() {
            failures += 1;
        }
        checked += 1;
    }
    report(
        "cohort_algebra",
        failures == 0,
        format!("{checked} pairs, {nonempty} non-empty intersections, {failures} failures"),
    );
    assert_eq!(failures, 0);
}

#[test]
fn qualitative_feature_ranking() {
    let f = heloc();
    let names: Vec<&str> = f.dataset.schema().iter().map(|s| s.name.as_str()).collect();
    let agg = aggregate_transitions(&f.explanations).unwrap();
    let mut by_arrows: Vec<usize> = (0..names.len()).collect();
    by_arrows.sort_by_key(|&i| (std::cmp::Reverse(agg.feature_total(i)), i));

    let influence = |i: usize| match &f.scheme.features[i] {
        FeatureBinning::Continuous(b) => f.model.feature_weight(i).abs() * b.std,
        _ => 0.0,
    };
    let mut by_influence: Vec<usize> = (0..names.len()).collect();
    by_influence.sort_by(|&a, &b| influence(b).total_cmp(&influence(a)).then(a.cmp(&b)));
    let top2: BTreeSet<usize> = by_arrows[..2].iter().copied().collect();
    let top3: BTreeSet<usize> = by_influence[..3].iter().copied().collect();
    let overlap = !top2.is_disjoint(&top3);

    let pos = apply_filterset(&f.dataset, &f.cache, &FilterSet::predicted_positive()).unwrap();
    let neg = apply_filterset(&f.dataset, &f.cache, &FilterSet::predicted_negative()).unwrap();
    let a = summarize_cohort(&pos, &f.dataset, &f.scheme).unwrap();
    let b = summarize_cohort(&neg, &f.dataset, &f.scheme).unwrap();
    let order = sort_features(&a, &b, None, &f.scheme, SortKey::MedianDifference);
    let ere = f.dataset.feature_index(ERE).unwrap();
    let ere_rank = order.iter().position(|&i| i == ere).unwrap() + 1;

    let fmt = |ids: &[usize]| ids.iter().map(|&i| names[i]).collect::<Vec<_>>().join(", ");
    report(
        "qualitative_feature_ranking",
        overlap && ere_rank <= 5,
        format!(
            "top-2 by arrows [{}] ({} / {}), top-3 by |w*sd| [{}] ({:.3} / {:.3} / {:.3}); {ERE} median-difference rank {ere_rank}, top-5 [{}]",
            fmt(&by_arrows[..2]),
            agg.feature_total(by_arrows[0]),
            agg.feature_total(by_arrows[1]),
            fmt(&by_influence[..3]),
            influence(by_influence[0]),
            influence(by_influence[1]),
            influence(by_influence[2]),
            fmt(&order[..5]),
        ),
    );
    assert!(overlap);
    assert!(ere_rank <= 5);
}

#[test]
fn determinism() {
    let spec = SessionSpec {
        dataset: data_path(HELOC, "csv"),
        schema: SchemaSource::Path(data_path(HELOC, "schema.json")),
        model: ModelSpec::default(),
        config: Default::default(),
    };
    let first = Session::<f64>::create(&spec).unwrap().with_id("fixed");
    let second = Session::<f64>::create(&spec).unwrap().with_id("fixed");
    let (ea, eb) = (first.explanations_jsonl(), second.explanations_jsonl());
    let same_export = ea.as_bytes() == eb.as_bytes();
    let same_document = first.to_json_bytes().unwrap() == second.to_json_bytes().unwrap();
    report(
        "determinism",
        same_export && same_document,
        format!(
            "export {} bytes, sha-identical: {same_export}; session documents identical: {same_document}; fingerprint {}",
            ea.len(),
            first.fingerprint()
        ),
    );
    assert!(same_export);
    assert!(same_document);
    assert_eq!(first.fingerprint(), second.fingerprint());
}

#[test]
fn performance_budget() {
    let f = heloc();
    let rows: Vec<usize> = (0..10_000).collect();
    let start = Instant::now();
    let out = generate_batch(&f.dataset, &rows, &f.model, &f.scheme, &f.config, &f.decision).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "performance_budget",
        elapsed < 60.0,
        format!(
            "{} rows x {} features single-threaded in {elapsed:.2}s (budget 60s)",
            out.len(),
            f.dataset.n_features()
        ),
    );
    assert_eq!(out.len(), 10_000);
    assert!(elapsed < 60.0);
}

#[test]
fn regression_values() {
    // Frozen from a verified run; guards against silent behaviour drift.
    let checks = [
        ("credit training accuracy", heloc().cache.accuracy(), 8218.0 / 10459.0),
        ("credit success rate", success_rate(heloc()), 10442.0 / 10459.0),
        ("heart training accuracy", heart().cache.accuracy(), 263.0 / 303.0),
        ("heart success rate", success_rate(heart()), 1.0),
    ];
    let mut pass = true;
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, got, want)| {
            // About one row of slack on the larger dataset.
            let ok = (got - want).abs() <= 1e-4;
            pass &= ok;
            format!("{name} {got:.4} (frozen {want:.4})")
        })
        .collect();
    report("regression_values", pass, detail.join("; "));
    assert!(pass);
}

#[test]
fn larger_displacement_does_not_lower_success() {
    // Logged only: greedy paths can diverge once more moves are admissible.
    let f = heloc();
    let rows: Vec<usize> = (0..f.dataset.len()).collect();
    let rates: Vec<(usize, f64)> = [2usize, 4, 6]
        .iter()
        .map(|&l| {
            let cfg = AlgorithmConfig::new(f.config.max_changed_features, l);
            let out = generate_batch_parallel(&f.dataset, &rows, &f.model, &f.scheme, &cfg, &f.decision).unwrap();
            (l, out.iter().filter(|e| e.success).count() as f64 / out.len() as f64)
        })
        .collect();
    let monotone = rates.windows(2).all(|w| w[1].1 >= w[0].1);
    println!(
        "INFO success rate by l (w=5): {} -> non-decreasing: {monotone}",
        rates
            .iter()
            .map(|(l, r)| format!("l={l}: {r:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
}
