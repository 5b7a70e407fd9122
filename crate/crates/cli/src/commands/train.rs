//! Fit the selected model and persist it with its plan and stage trace.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use taxacc_core::augment::AugmentedCorpus;
use taxacc_core::baseline::{
    train_regressor, RegressorModel, RegressorOptions, TfidfOptions, TfidfSvmModel,
};
use taxacc_core::pipeline::{
    build_training_plan, execute_plan, handles, parse_commonsense_file, PipelineError,
};
use taxacc_core::{Corpus, TaskMode};

use crate::artifacts::{self, RunPaths};
use crate::config::{build_backend, build_encoder, plan_overrides, ModelKind, RunConfig};
use crate::errors::CliError;

use super::{finish, load_train};

pub const REGRESSOR_FORMAT: &str = "regressor/1";

/// Saved likert model: the regressor plus enough encoder detail to rebuild
/// the same embedding space at predict time.
#[derive(Debug, Serialize, Deserialize)]
pub struct RegressorArtifact {
    pub format: String,
    pub encoder: EncoderSnapshot,
    pub clamp: bool,
    pub model: RegressorModel,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EncoderSnapshot {
    pub spec: String,
    pub dim: usize,
    pub ngram_max: usize,
}

pub fn run(config: &RunConfig, overwrite: bool) -> Result<(), CliError> {
    let paths = RunPaths::new(&config.run_dir, config.language);
    match config.model_kind()? {
        ModelKind::Pipeline(strategy) => train_pipeline(config, &paths, strategy, overwrite),
        ModelKind::TfidfSvm => train_tfidf_svm(config, &paths, overwrite),
        ModelKind::Regressor(kind) => train_regressor_model(config, &paths, kind, overwrite),
    }
}

fn load_augmented(path: &Path, config: &RunConfig) -> Result<Option<Corpus>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let augmented = AugmentedCorpus::read_tsv(path, config.language, TaskMode::Binary)?;
    if augmented.is_empty() {
        return Ok(None);
    }
    Ok(Some(augmented.to_corpus()?))
}

fn train_pipeline(
    config: &RunConfig,
    paths: &RunPaths,
    strategy: taxacc_core::pipeline::Strategy,
    overwrite: bool,
) -> Result<(), CliError> {
    let train = load_train(config)?;
    let mut fingerprints = BTreeMap::from([("train".to_string(), train.fingerprint())]);

    let mut data: BTreeMap<String, Corpus> = BTreeMap::new();
    data.insert(handles::ORIGINAL.to_string(), train);
    if let Some(corpus) = load_augmented(&paths.nlpaug(), config)? {
        fingerprints.insert(handles::NLPAUG.to_string(), corpus.fingerprint());
        data.insert(handles::NLPAUG.to_string(), corpus);
    }
    if let Some(corpus) = load_augmented(&paths.translated(), config)? {
        fingerprints.insert(handles::TRANSLATED.to_string(), corpus.fingerprint());
        data.insert(handles::TRANSLATED.to_string(), corpus);
    }
    if let Some(path) = &config.paths.commonsense {
        let corpus = parse_commonsense_file(path, config.language)?;
        fingerprints.insert(handles::COMMONSENSE.to_string(), corpus.fingerprint());
        data.insert(handles::COMMONSENSE.to_string(), corpus);
    }

    let available: Vec<&str> = data.keys().map(String::as_str).collect();
    let plan = build_training_plan(strategy, config.language, &available, &plan_overrides(config))
        .map_err(|e| match e {
            PipelineError::MissingDataset { handle, strategy } => CliError::data(format!(
                "strategy {strategy} needs the {handle:?} dataset; run `taxacc augment` first \
                 (or set paths.commonsense)",
            )),
            other => CliError::from(other),
        })?;

    let mut backend = build_backend(config)?;

    let outputs = [paths.model(), paths.plan(), paths.trace()];
    artifacts::ensure_writable(
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        overwrite,
    )?;

    let trace = execute_plan(&plan, backend.as_mut(), &data, config.seed)?;
    backend.save(&paths.model())?;

    let plan_body = serde_json::to_string_pretty(&plan)
        .map_err(|e| CliError::data(format!("cannot serialize plan: {e}")))?;
    std::fs::write(paths.plan(), plan_body)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", paths.plan().display())))?;

    // one JSON object per line: a header, then each stage as it ran
    let mut log = serde_json::to_string(&serde_json::json!({
        "strategy": trace.strategy,
        "language": trace.language,
        "seed": trace.seed,
    }))
    .expect("header serializes");
    log.push('\n');
    for stage in &trace.stages {
        log.push_str(
            &serde_json::to_string(stage)
                .map_err(|e| CliError::data(format!("cannot serialize trace: {e}")))?,
        );
        log.push('\n');
    }
    std::fs::write(paths.trace(), log)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", paths.trace().display())))?;

    finish(
        config,
        paths,
        "train",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        fingerprints,
    )?;

    println!(
        "trained {} with {}: {} stage(s), backend {}",
        config.language,
        plan.strategy,
        trace.stages.len(),
        trace
            .stages
            .last()
            .map(|s| s.backend_fingerprint.as_str())
            .unwrap_or("untouched"),
    );
    Ok(())
}

fn train_tfidf_svm(config: &RunConfig, paths: &RunPaths, overwrite: bool) -> Result<(), CliError> {
    let train = load_train(config)?;
    let outputs = [paths.model()];
    artifacts::ensure_writable(&[&paths.model()], overwrite)?;

    let options = TfidfOptions {
        ngram_max: config.baseline.ngram_max,
        char_mode: config.baseline.char_ngrams,
    };
    let model = TfidfSvmModel::train(&train, &options, config.baseline.svm_c)?;
    model.save(&paths.model())?;

    finish(
        config,
        paths,
        "train",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        BTreeMap::from([("train".to_string(), train.fingerprint())]),
    )?;
    println!("trained {} tf-idf + svm baseline", config.language);
    Ok(())
}

fn train_regressor_model(
    config: &RunConfig,
    paths: &RunPaths,
    kind: taxacc_core::baseline::RegressorKind,
    overwrite: bool,
) -> Result<(), CliError> {
    let train = load_train(config)?;
    let scores = train
        .scores()
        .ok_or_else(|| CliError::data("regressors need likert-scored training data"))?;
    let texts: Vec<String> = train.iter().map(|e| e.text.clone()).collect();

    let encoder = build_encoder(config)?;
    artifacts::ensure_writable(&[&paths.model()], overwrite)?;

    let embeddings = encoder.encode(&texts)?;
    let options = RegressorOptions {
        knn_k: config.baseline.knn_k,
        svr_epsilon: config.baseline.svr_epsilon,
        svr_c: config.baseline.svr_c,
    };
    let model = train_regressor(&embeddings, &scores, kind, &options)?;

    let artifact = RegressorArtifact {
        format: REGRESSOR_FORMAT.to_string(),
        encoder: EncoderSnapshot {
            spec: config.providers.encoder.clone(),
            dim: encoder.dim(),
            ngram_max: config.baseline.encoder_ngram,
        },
        clamp: config.baseline.clamp,
        model,
    };
    let body = serde_json::to_string_pretty(&artifact)
        .map_err(|e| CliError::data(format!("cannot serialize model: {e}")))?;
    std::fs::write(paths.model(), body)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", paths.model().display())))?;

    finish(
        config,
        paths,
        "train",
        &[&paths.model()],
        BTreeMap::from([("train".to_string(), train.fingerprint())]),
    )?;
    println!("trained {} {} regressor", config.language, kind);
    Ok(())
}
