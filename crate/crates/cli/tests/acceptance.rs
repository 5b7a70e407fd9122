//! End-to-end acceptance checks for the whole toolkit. Each test states the
//! property it pins; together they cover metric consistency, augmentation
//! and split invariants, plan fidelity, the regressor suite, the baseline,
//! and CLI determinism.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taxacc_core::augment::{
    augment_binary_corpus_with, AugmentOptions, Candidate, ContextualFillModel, EditOperation,
    LexiconFill,
};
use taxacc_core::baseline::{
    epsilon_insensitive_loss, predict_scores, train_regressor, RegressorKind, RegressorOptions,
    TfidfOptions, TfidfSvmModel,
};
use taxacc_core::corpus::{
    build_df_index, pattern_of, split_dev_validation, Annotation, CorpusError, SplitConfig,
};
use taxacc_core::eval::{binary_metrics, f1_from_precision_recall, global_score, spearman_rho};
use taxacc_core::pipeline::{
    build_training_plan, execute_plan, ClassifierBackend, PipelineError, PlanOverrides,
    StageConfig, Strategy,
};
use taxacc_core::{Corpus, Example, Language};

fn example(id: &str, text: &str, label: u8) -> Example {
    Example {
        id: id.to_string(),
        text: text.to_string(),
        language: Language::En,
        annotation: Annotation::Label(label),
    }
}

fn corpus(rows: &[(&str, &str, u8)]) -> Corpus {
    Corpus::new(
        Language::En,
        rows.iter().map(|(i, t, l)| example(i, t, *l)).collect(),
    )
    .expect("valid corpus")
}

/// Published sub-task-1 scores: (language, recall %, precision %, F1 %).
const SUBTASK1_ROWS: [(Language, f64, f64, f64); 3] = [
    (Language::En, 95.26, 90.54, 92.84),
    (Language::Fr, 93.14, 85.83, 89.34),
    (Language::It, 90.47, 92.69, 91.57),
];

#[test]
fn criterion_01_f1_consistent_with_published_precision_recall() {
    let mut per_language = BTreeMap::new();
    for (language, recall, precision, f1) in SUBTASK1_ROWS {
        let computed = f1_from_precision_recall(precision, recall);
        assert!(
            (computed - f1).abs() <= 0.01,
            "{language}: F1 from (P={precision}, R={recall}) is {computed:.4}, published {f1}"
        );
        per_language.insert(language, f1);
    }
    let global = global_score(&per_language).expect("all three languages present");
    assert!(
        (global - 91.25).abs() <= 0.01,
        "global mean {global:.4} vs published 91.25"
    );
    println!("criterion 01 satisfied: per-language F1 within 0.01, global {global:.2}");
}

#[test]
fn criterion_02_graded_global_mean_matches_published_value() {
    let per_language = BTreeMap::from([
        (Language::En, 0.478),
        (Language::Fr, -0.059),
        (Language::It, 0.246),
    ]);
    let global = global_score(&per_language).expect("all three languages present");
    assert!((global - 0.665 / 3.0).abs() < 1e-12, "exact mean, got {global}");
    assert!(
        (global - 0.221).abs() <= 0.001,
        "published 0.221 under truncation, computed {global:.6}"
    );
    println!("criterion 02 satisfied: graded global {global:.4} within 0.001 of 0.221");
}

/// Independent oracle: average ranks by brute force, then Pearson.
fn oracle_spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|x| {
                let less = v.iter().filter(|y| *y < x).count() as f64;
                let equal = v.iter().filter(|y| *y == x).count() as f64;
                // average of positions less+1 ..= less+equal
                less + (equal + 1.0) / 2.0
            })
            .collect()
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va.sqrt() * vb.sqrt())
}

#[test]
fn criterion_03_spearman_matches_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.gen_range(3..=12);
        // a small value range forces plenty of ties
        let a: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..5_i32))).collect();
        let b: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..5_i32))).collect();
        let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
        if constant(&a) || constant(&b) {
            continue;
        }
        let ours = spearman_rho(&a, &b).expect("non-constant vectors").rho;
        let reference = oracle_spearman(&a, &b);
        assert!(
            (ours - reference).abs() < 1e-12,
            "n={n}: {ours} vs oracle {reference}\na={a:?}\nb={b:?}"
        );
        checked += 1;
    }

    let fixture = spearman_rho(
        &[1.0, 2.0, 3.0, 4.0, 5.0],
        &[1.0, 3.0, 2.0, 5.0, 4.0],
    )
    .unwrap();
    assert_eq!(fixture.rho, 0.8, "the classic 0.8 fixture must be exact");
    println!("criterion 03 satisfied: 200 oracle comparisons within 1e-12, fixture exactly 0.8");
}

/// Deterministic mock fill: suggestion depends only on the masked context.
struct HashFill;

impl ContextualFillModel for HashFill {
    fn suggest(&self, tokens: &[String], position: usize) -> Vec<Candidate> {
        let mut h: u64 = 0xcbf29ce484222325;
        for t in tokens {
            for b in t.bytes() {
                h = (h ^ u64::from(b)).wrapping_mul(0x100000001b3);
            }
        }
        h = h.wrapping_add(position as u64);
        vec![
            Candidate::new(format!("w{}", h % 97), 0.9),
            Candidate::new(format!("w{}", (h >> 8) % 97), 0.5),
        ]
    }
}

#[test]
fn criterion_04_augmentation_invariants_over_a_thousand_seeded_runs() {
    let started = std::time::Instant::now();
    let base = corpus(&[
        ("a1", "I like beer, a special kind of drink.", 1),
        ("a2", "I like drink, a special kind of beer.", 0),
        ("a3", "I like oaks, and trees in general.", 1),
        ("a4", "I like trees, and oaks in general.", 0),
        ("a5", "I like poodles, and more specifically dogs.", 0),
        ("a6", "I like dogs, and more specifically poodles.", 1),
    ]);
    let by_id: BTreeMap<&str, u8> = base
        .iter()
        .map(|e| (e.id.as_str(), e.label().unwrap()))
        .collect();
    let options = AugmentOptions {
        insert_variants: 1,
        substitute_variants: 1,
        max_edits: 2,
    };

    let lexicon = LexiconFill::english();
    let models: [&(dyn ContextualFillModel + Sync); 2] = [&lexicon, &HashFill];
    let mut runs = 0;
    for (m, fill) in models.iter().enumerate() {
        for seed in 0..500u64 {
            let out = augment_binary_corpus_with(&base, *fill, seed, &options).unwrap();
            for item in out.iter() {
                let source_label = by_id[item.source_id.as_str()];
                assert_eq!(
                    item.example.label(),
                    Some(source_label),
                    "label must survive augmentation"
                );
                if item.operation == EditOperation::Substitute {
                    assert_eq!(source_label, 1, "substitution may only touch positives");
                }
                if item.skipped {
                    assert_eq!(item.edits, 0, "passthrough rows carry no edits");
                } else {
                    assert!(
                        (1..=2).contains(&item.edits),
                        "edit count {} outside 1..=2 (model {m}, seed {seed})",
                        item.edits
                    );
                }
            }
            let again = augment_binary_corpus_with(&base, *fill, seed, &options).unwrap();
            assert_eq!(out, again, "same seed must reproduce the corpus exactly");
            runs += 1;
        }
    }
    assert_eq!(runs, 1000);
    assert!(
        started.elapsed().as_secs() < 10,
        "augmentation sweep took {:?}",
        started.elapsed()
    );
    println!("criterion 04 satisfied: 1000 seeded augmentations, all invariants held");
}

/// A corpus of `patterns` sentence shapes with `per_pattern` sentences each;
/// every sentence gets its own pair of rare nouns, labels alternate.
fn synthetic_split_corpus(patterns: usize, per_pattern: usize) -> Corpus {
    let mut rows = Vec::new();
    for p in 0..patterns {
        for s in 0..per_pattern {
            let n = rows.len();
            rows.push(example(
                &format!("x{n}"),
                &format!("shape{p} likes noun{n}a and noun{n}b always"),
                (s % 2) as u8,
            ));
        }
    }
    Corpus::new(Language::En, rows).unwrap()
}

#[test]
fn criterion_05_split_properties_over_a_hundred_random_corpora() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let patterns = rng.gen_range(3..=8);
        let per_pattern = rng.gen_range(6..=14);
        let corpus = synthetic_split_corpus(patterns, per_pattern);
        let df = build_df_index(&corpus).unwrap();
        let config = SplitConfig {
            dev_fraction: 0.3,
            seed: rng.gen(),
            df_threshold: 0.05,
        };

        // hold out at most half the shapes so the split stays feasible
        let all_patterns: BTreeSet<_> = corpus
            .iter()
            .map(|e| pattern_of(e, &df, config.df_threshold).unwrap().0)
            .collect();
        let held: Vec<_> = all_patterns
            .iter()
            .filter(|_| rng.gen_bool(0.3))
            .take(patterns / 2)
            .cloned()
            .collect();

        let split = split_dev_validation(&corpus, &df, &held, &config).unwrap();

        let dev_ids: BTreeSet<_> = split.dev.iter().map(|e| e.id.clone()).collect();
        let val_ids: BTreeSet<_> = split.val.iter().map(|e| e.id.clone()).collect();
        assert!(dev_ids.is_disjoint(&val_ids), "case {case}: dev and val overlap");
        assert_eq!(
            dev_ids.len() + val_ids.len(),
            corpus.len(),
            "case {case}: split must cover the corpus"
        );

        for e in split.dev.iter() {
            let (pattern, _) = pattern_of(e, &df, config.df_threshold).unwrap();
            assert!(
                !split.held_out_patterns.contains(&pattern),
                "case {case}: held-out pattern leaked into dev"
            );
        }

        let want = (corpus.len() as f64 * config.dev_fraction).round();
        assert!(
            (split.dev.len() as f64 - want).abs() <= 1.0,
            "case {case}: dev size {} vs target {want}",
            split.dev.len()
        );
    }

    // forcing every shape out of dev leaves nothing to draw from
    let corpus = synthetic_split_corpus(4, 8);
    let df = build_df_index(&corpus).unwrap();
    let config = SplitConfig {
        dev_fraction: 0.3,
        seed: 11,
        df_threshold: 0.05,
    };
    let all: Vec<_> = corpus
        .iter()
        .map(|e| pattern_of(e, &df, config.df_threshold).unwrap().0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    match split_dev_validation(&corpus, &df, &all, &config) {
        Err(CorpusError::InfeasibleSplit { covered, total, .. }) => {
            assert_eq!(covered, total, "everything was forced out of dev");
        }
        other => panic!("expected an infeasible split, got {other:?}"),
    }
    assert!(
        started.elapsed().as_secs() < 10,
        "split sweep took {:?}",
        started.elapsed()
    );
    println!("criterion 05 satisfied: 100 random splits honored all constraints");
}

/// Backend that only records what it was asked to train on.
#[derive(Default)]
struct RecordingBackend {
    calls: Vec<(Vec<String>, f64, u32, u32)>,
}

impl ClassifierBackend for RecordingBackend {
    fn fine_tune(&mut self, _corpus: &Corpus, stage: &StageConfig) -> Result<(), PipelineError> {
        self.calls.push((
            stage.datasets.clone(),
            stage.learning_rate,
            stage.epochs,
            stage.batch_size,
        ));
        Ok(())
    }
    fn predict(&self, texts: &[String]) -> Result<Vec<u8>, PipelineError> {
        Ok(vec![0; texts.len()])
    }
    fn fingerprint(&self) -> String {
        format!("recording/{}", self.calls.len())
    }
    fn save(&self, _path: &Path) -> Result<(), PipelineError> {
        Ok(())
    }
    fn load(&mut self, _path: &Path) -> Result<(), PipelineError> {
        Ok(())
    }
}

#[test]
fn criterion_06_plans_match_the_published_strategy_matrix() {
    let expected: [(&str, Vec<(Vec<&str>, f64)>); 6] = [
        ("uu_tax", vec![(vec!["nlpaug"], 3e-5), (vec!["translated", "original"], 4e-5)]),
        ("ablation1", vec![(vec!["nlpaug"], 3e-5), (vec!["original"], 4e-5)]),
        ("ablation2", vec![(vec!["translated"], 3e-5), (vec!["original"], 4e-5)]),
        ("single_stage_1", vec![(vec!["original"], 4e-5)]),
        ("single_stage_2", vec![(vec!["nlpaug", "translated", "original"], 4e-5)]),
        ("multi_task", vec![(vec!["commonsense"], 3e-5), (vec!["nlpaug", "original"], 4e-5)]),
    ];
    let available = ["original", "nlpaug", "translated", "commonsense"];

    for (name, stages) in &expected {
        let strategy: Strategy = name.parse().unwrap();
        let plan = build_training_plan(
            strategy,
            Language::En,
            &available,
            &PlanOverrides::default(),
        )
        .unwrap();
        assert_eq!(plan.strategy, *name);
        assert_eq!(plan.stages.len(), stages.len(), "{name}: stage count");
        for (got, (datasets, lr)) in plan.stages.iter().zip(stages) {
            assert_eq!(&got.datasets, datasets, "{name}: datasets");
            assert_eq!(got.learning_rate, *lr, "{name}: learning rate");
            assert_eq!(got.epochs, 4, "{name}: epochs");
            assert_eq!(got.batch_size, 8, "{name}: batch size");
            assert_eq!(got.optimizer, "adamw", "{name}: optimizer");
            assert_eq!(got.lr_schedule, "linear_decay", "{name}: schedule");
        }
    }

    // the executed trace must visit stages in plan order
    let data = BTreeMap::from([
        ("original".to_string(), corpus(&[("o1", "good one", 1), ("o2", "bad one", 0)])),
        ("nlpaug".to_string(), corpus(&[("n1", "augmented one", 1)])),
        ("translated".to_string(), corpus(&[("t1", "translated one", 1)])),
        ("commonsense".to_string(), corpus(&[("c1", "sensible one", 1)])),
    ]);
    let plan = build_training_plan(
        Strategy::UuTax,
        Language::En,
        &available,
        &PlanOverrides::default(),
    )
    .unwrap();
    let mut backend = RecordingBackend::default();
    let trace = execute_plan(&plan, &mut backend, &data, 7).unwrap();
    assert_eq!(backend.calls.len(), 2);
    assert_eq!(backend.calls[0].0, vec!["nlpaug"]);
    assert_eq!(backend.calls[0].1, 3e-5);
    assert_eq!(backend.calls[1].0, vec!["translated", "original"]);
    assert_eq!(backend.calls[1].1, 4e-5);
    assert_eq!(trace.stages.len(), 2);
    assert_eq!(trace.stages[0].stage, 1);
    assert_eq!(trace.stages[1].stage, 2);
    println!("criterion 06 satisfied: all six strategies match the matrix, trace ordered");
}

#[test]
fn criterion_07_regressor_oracles() {
    // straight line: intercept and slope recovered to machine precision
    let x: Vec<Vec<f64>> = (0..6).map(|i| vec![f64::from(i)]).collect();
    let y: Vec<f64> = (0..6).map(|i| 2.0 * f64::from(i) + 1.0).collect();
    let ols = train_regressor(&x, &y, RegressorKind::Ols, &RegressorOptions::default()).unwrap();
    let probes = vec![vec![0.0], vec![1.0], vec![10.0], vec![-3.0]];
    let preds = predict_scores(&ols, &probes, false).unwrap();
    for (p, x0) in preds.iter().zip([0.0, 1.0, 10.0, -3.0]) {
        assert!(
            (p - (2.0 * x0 + 1.0)).abs() < 1e-10,
            "line fit off at x={x0}: {p}"
        );
    }

    // k=1 nearest neighbor memorizes the training set
    let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i), f64::from(i * i)]).collect();
    let ys: Vec<f64> = (0..10).map(|i| f64::from(i) * 0.7 + 1.0).collect();
    let knn = train_regressor(
        &xs,
        &ys,
        RegressorKind::Knn,
        &RegressorOptions {
            knn_k: 1,
            ..RegressorOptions::default()
        },
    )
    .unwrap();
    assert_eq!(predict_scores(&knn, &xs, false).unwrap(), ys);

    // unlimited-depth regression tree: zero training error on distinct inputs
    let tree = train_regressor(&xs, &ys, RegressorKind::Tree, &RegressorOptions::default()).unwrap();
    assert_eq!(predict_scores(&tree, &xs, false).unwrap(), ys);

    // targets inside a 2-epsilon window cost nothing
    let bx: Vec<Vec<f64>> = (0..8).map(|i| vec![f64::from(i)]).collect();
    let by: Vec<f64> = (0..8).map(|i| 4.0 + 0.03 * f64::from(i % 3)).collect();
    let svr = train_regressor(
        &bx,
        &by,
        RegressorKind::Svr,
        &RegressorOptions {
            svr_epsilon: 0.2,
            svr_c: 1.0,
            ..RegressorOptions::default()
        },
    )
    .unwrap();
    let svr_preds = predict_scores(&svr, &bx, false).unwrap();
    assert_eq!(
        epsilon_insensitive_loss(&by, &svr_preds, 0.2),
        0.0,
        "band-sized spread must be free"
    );

    // loss subgradient against central differences, away from the kinks
    let truth = [1.0, 2.0, 3.0, 4.0, 5.0];
    let preds = [1.5, 1.9, 3.05, 3.2, 5.9];
    let eps = 0.2;
    let h = 1e-6;
    for i in 0..truth.len() {
        let r: f64 = preds[i] - truth[i];
        let analytic = if r.abs() <= eps { 0.0 } else { r.signum() };
        let mut plus = preds.to_vec();
        let mut minus = preds.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let numeric = (epsilon_insensitive_loss(&truth, &plus, eps)
            - epsilon_insensitive_loss(&truth, &minus, eps))
            / (2.0 * h);
        assert!(
            (numeric - analytic).abs() < 1e-4,
            "coordinate {i}: numeric {numeric} vs analytic {analytic}"
        );
    }
    println!("criterion 07 satisfied: OLS, KNN, tree and SVR oracles all hold");
}

/// Sentences whose acceptability is visible in the scaffold, so it transfers
/// to nouns never seen in training.
fn relation_sentence(a: &str, b: &str, positive: bool) -> String {
    if positive {
        format!("I adore {a}, a special kind of {b}.")
    } else {
        format!("I adore {a}, hardly a kind of {b}.")
    }
}

#[test]
fn criterion_08_tfidf_svm_baseline_beats_majority_class() {
    let started = std::time::Instant::now();
    let mut train_rows = Vec::new();
    for i in 0..200 {
        let positive = i % 2 == 0;
        train_rows.push((
            format!("tr{i}"),
            relation_sentence(&format!("krola{i}"), &format!("krolb{i}"), positive),
            u8::from(positive),
        ));
    }
    let train = Corpus::new(
        Language::En,
        train_rows
            .iter()
            .map(|(i, t, l)| example(i, t, *l))
            .collect(),
    )
    .unwrap();
    assert_eq!(train.len(), 200);

    let options = TfidfOptions {
        ngram_max: 3,
        char_mode: false,
    };
    let model = TfidfSvmModel::train(&train, &options, 1.0).unwrap();

    let train_texts: Vec<String> = train.iter().map(|e| e.text.clone()).collect();
    let train_preds = model.predict(&train_texts);
    let train_golds: Vec<u8> = train.iter().map(|e| e.label().unwrap()).collect();
    let correct = train_preds
        .iter()
        .zip(&train_golds)
        .filter(|(p, g)| p == g)
        .count();
    assert_eq!(correct, train.len(), "training accuracy must be 100%");

    // held-out nouns never overlap the training vocabulary
    let mut test_rows = Vec::new();
    for i in 0..60 {
        let positive = i % 2 == 0;
        test_rows.push((
            format!("te{i}"),
            relation_sentence(&format!("zundra{i}"), &format!("zundrb{i}"), positive),
            u8::from(positive),
        ));
    }
    let test = Corpus::new(
        Language::En,
        test_rows
            .iter()
            .map(|(i, t, l)| example(i, t, *l))
            .collect(),
    )
    .unwrap();
    let test_texts: Vec<String> = test.iter().map(|e| e.text.clone()).collect();
    let test_golds: Vec<u8> = test.iter().map(|e| e.label().unwrap()).collect();

    let svm_f1 = 100.0 * binary_metrics(&model.predict(&test_texts), &test_golds).unwrap().f1;
    let majority = vec![1u8; test_golds.len()];
    let majority_f1 = 100.0 * binary_metrics(&majority, &test_golds).unwrap().f1;
    assert!(
        svm_f1 - majority_f1 >= 20.0,
        "baseline F1 {svm_f1:.2} must beat majority {majority_f1:.2} by 20 points"
    );
    assert!(
        started.elapsed().as_secs() < 60,
        "baseline fixture took {:?}",
        started.elapsed()
    );
    println!(
        "criterion 08 satisfied: train accuracy 100%, held-out F1 {svm_f1:.2} vs majority {majority_f1:.2}"
    );
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(Path::parent)
        .expect("workspace root")
        .to_path_buf()
}

fn run_chain(run_dir: &Path) {
    let bin = env!("CARGO_BIN_EXE_taxacc");
    for command in ["prepare", "augment", "train", "predict", "evaluate", "analyze"] {
        let status = Command::new(bin)
            .current_dir(repo_root())
            .args([
                command,
                "--config",
                "configs/toy_en.toml",
                "--run-dir",
                run_dir.to_str().unwrap(),
            ])
            .status()
            .expect("spawn taxacc");
        assert!(status.success(), "taxacc {command} failed");
    }
}

fn collect_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable run dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).expect("readable artifact"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn criterion_09_cli_chain_is_byte_deterministic() {
    let started = std::time::Instant::now();
    let scratch = tempfile::tempdir().unwrap();
    let (dir_a, dir_b) = (scratch.path().join("a"), scratch.path().join("b"));
    run_chain(&dir_a);
    run_chain(&dir_b);

    let mut files_a = collect_files(&dir_a);
    let mut files_b = collect_files(&dir_b);
    let manifest_a = files_a.remove("manifest_en.json").expect("manifest written");
    let manifest_b = files_b.remove("manifest_en.json").expect("manifest written");

    assert_eq!(
        files_a.keys().collect::<Vec<_>>(),
        files_b.keys().collect::<Vec<_>>(),
        "artifact trees list different files"
    );
    for (name, bytes) in &files_a {
        assert_eq!(
            bytes, &files_b[name],
            "artifact {name} differs between identical runs"
        );
    }

    // manifests differ only in wall-clock stamps and the run dir override
    let scrub = |raw: &[u8]| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_slice(raw).unwrap();
        if let Some(commands) = v["commands"].as_object_mut() {
            for c in commands.values_mut() {
                c.as_object_mut().unwrap().remove("completed_unix");
            }
        }
        v["config"]["run_dir"] = serde_json::Value::Null;
        v
    };
    assert_eq!(scrub(&manifest_a), scrub(&manifest_b), "manifests disagree");
    assert!(
        started.elapsed().as_secs() < 60,
        "determinism chain took {:?}",
        started.elapsed()
    );
    println!(
        "criterion 09 satisfied: {} artifacts byte-identical across runs",
        files_a.len()
    );
}

/// Optional and not gating: drive the full two-stage strategy against real
/// task data and a real classifier worker.
///
/// Point `TAXACC_REAL_CONFIG` at a config whose `paths` reference the
/// official task files and whose `providers.backend` is a
/// `subprocess:<command>` wrapping a genuine transformer, then run
/// `cargo test --test acceptance -- --ignored criterion_10`.
/// Scores are printed, not asserted: published numbers came from GPU
/// fine-tuning with acknowledged run-to-run instability.
#[test]
#[ignore = "needs official task data and a real transformer worker"]
fn criterion_10_real_transformer_integration() {
    let Ok(config) = std::env::var("TAXACC_REAL_CONFIG") else {
        println!("criterion 10 skipped: TAXACC_REAL_CONFIG is not set");
        return;
    };
    let bin = env!("CARGO_BIN_EXE_taxacc");
    let scratch = tempfile::tempdir().unwrap();
    let run_dir = scratch.path().join("real");
    for command in ["prepare", "augment", "train", "predict", "evaluate"] {
        let status = Command::new(bin)
            .args([
                command,
                "--config",
                &config,
                "--strategy",
                "uu_tax",
                "--run-dir",
                run_dir.to_str().unwrap(),
            ])
            .status()
            .expect("spawn taxacc");
        assert!(status.success(), "taxacc {command} failed");
    }
    for language in ["en", "fr", "it"] {
        let metrics = run_dir.join("evaluate").join(format!("metrics_{language}.tsv"));
        if metrics.exists() {
            println!(
                "criterion 10 metrics ({language}):\n{}",
                std::fs::read_to_string(metrics).unwrap()
            );
        }
    }
    println!("criterion 10 satisfied: real-backend chain ran to completion");
}
