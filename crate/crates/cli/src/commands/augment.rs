//! Produce both augmented datasets: contextual edits and translations.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use taxacc_core::augment::{
    augment_binary_corpus_with, dedupe_against, normalize, translate_corpus, AugmentOptions,
    AugmentedCorpus, RetryPolicy, TranslationCache,
};
use taxacc_core::corpus::{parse_task_file, ColumnMap};
use taxacc_core::{Language, TaskMode};

use crate::artifacts::{self, RunPaths};
use crate::config::{build_fill, build_translator, RunConfig};
use crate::errors::CliError;

use super::{finish, load_train};

#[derive(Debug, Serialize)]
struct TranslationSummary {
    sources: Vec<String>,
    translated: usize,
    failed: Vec<String>,
    provider_calls: usize,
    cache_hits: usize,
    untranslated_dropped: usize,
    duplicate_dropped: usize,
    kept: usize,
    dedupe_fraction: f64,
}

pub fn run(config: &RunConfig, overwrite: bool) -> Result<(), CliError> {
    if config.mode() != TaskMode::Binary {
        return Err(CliError::config(
            "augment works on the binary task; likert runs train directly on the original data",
        ));
    }

    // providers first: a missing credential must fail before any work
    let fill = build_fill(config)?;
    let translator = build_translator(config)?;

    let paths = RunPaths::new(&config.run_dir, config.language);
    artifacts::require_artifact(&paths.dev(), "prepare")?;
    let train = load_train(config)?;

    let outputs = [paths.nlpaug(), paths.translated(), paths.translation_report()];
    artifacts::ensure_writable(
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        overwrite,
    )?;

    let options = AugmentOptions {
        insert_variants: config.augment.insert_variants,
        substitute_variants: config.augment.substitute_variants,
        max_edits: config.augment.max_edits,
    };
    let augmented = augment_binary_corpus_with(&train, fill.as_ref(), config.seed, &options)?;
    augmented.write_tsv(&paths.nlpaug())?;

    let cache_path = config.translation_cache_path();
    if let Some(parent) = cache_path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::data(format!("cannot create {}: {e}", parent.display())))?;
    }
    let mut cache = TranslationCache::open(&cache_path)?;
    let retry = RetryPolicy::default();

    let mut combined = AugmentedCorpus {
        language: config.language,
        items: Vec::new(),
    };
    let mut summary = TranslationSummary {
        sources: Vec::new(),
        translated: 0,
        failed: Vec::new(),
        provider_calls: 0,
        cache_hits: 0,
        untranslated_dropped: 0,
        duplicate_dropped: 0,
        kept: 0,
        dedupe_fraction: 0.0,
    };
    let mut fingerprints = BTreeMap::from([("train".to_string(), train.fingerprint())]);

    for source_path in &config.paths.translation_sources {
        let source_language = Language::from_path(source_path)
            .expect("validated when the config loaded");
        let source = parse_task_file(
            source_path,
            source_language,
            TaskMode::Binary,
            &ColumnMap::default(),
        )?;
        fingerprints.insert(format!("source_{source_language}"), source.fingerprint());

        let report = translate_corpus(
            &source,
            config.language,
            translator.as_ref(),
            &mut cache,
            &retry,
        )?;
        summary.sources.push(source_path.display().to_string());
        summary.translated += report.corpus.len();
        summary.failed.extend(report.failed);
        summary.provider_calls += report.provider_calls;
        summary.cache_hits += report.cache_hits;

        // rows the provider left in the source language add nothing to a
        // target-language training set; treat them as duplicates of their own
        // source sentence
        let source_texts: BTreeSet<String> =
            source.iter().map(|e| normalize(&e.text)).collect();
        for item in report.corpus.items {
            if source_texts.contains(&normalize(&item.example.text)) {
                summary.untranslated_dropped += 1;
            } else {
                combined.items.push(item);
            }
        }
    }

    // different sources can land on the same target sentence; keep the first
    let mut seen_translations = BTreeSet::new();
    combined.items.retain(|item| {
        let fresh = seen_translations.insert(normalize(&item.example.text));
        if !fresh {
            summary.duplicate_dropped += 1;
        }
        fresh
    });

    let (deduped, dedupe) = dedupe_against(&combined, &train)?;
    summary.duplicate_dropped += dedupe.dropped;
    summary.kept = deduped.len();
    if summary.translated > 0 {
        summary.dedupe_fraction =
            (summary.untranslated_dropped + summary.duplicate_dropped) as f64
                / summary.translated as f64;
    }
    deduped.write_tsv(&paths.translated())?;

    let report_body = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::data(format!("cannot serialize translation report: {e}")))?;
    std::fs::write(paths.translation_report(), report_body).map_err(|e| {
        CliError::data(format!(
            "cannot write {}: {e}",
            paths.translation_report().display()
        ))
    })?;

    finish(
        config,
        &paths,
        "augment",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        fingerprints,
    )?;

    println!(
        "augmented {}: {} contextual rows, {} translated rows kept ({} dropped as duplicates)",
        config.language,
        augmented.len(),
        summary.kept,
        summary.untranslated_dropped + summary.duplicate_dropped,
    );
    Ok(())
}
