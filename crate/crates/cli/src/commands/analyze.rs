//! Break test errors down by sentence pattern, optionally across several
//! prediction runs for a side-by-side table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use taxacc_core::corpus::{build_df_index, pattern_of};
use taxacc_core::eval::{emit_pattern_errors, per_pattern_errors, PatternErrorReport, ReportFormat};
use taxacc_core::{Corpus, Pattern, TaskMode};

use crate::artifacts::{self, RunPaths};
use crate::config::RunConfig;
use crate::errors::CliError;

use super::{finish, load_test};

pub fn run(
    config: &RunConfig,
    compare: &[(String, PathBuf)],
    overwrite: bool,
) -> Result<(), CliError> {
    if config.mode() != TaskMode::Binary {
        return Err(CliError::config(
            "analyze works on the binary task; graded scores have no pattern table",
        ));
    }
    let paths = RunPaths::new(&config.run_dir, config.language);
    let test = load_test(config)?;
    artifacts::require_artifact(&paths.patterns(), "prepare")?;
    artifacts::require_artifact(&paths.predictions(), "predict")?;
    let training_patterns = artifacts::read_pattern_set(&paths.patterns(), config.language)?;

    // patterns come from the test corpus itself, so the table also covers
    // shapes never seen during training
    let df_index = build_df_index(&test)?;
    let patterns: Vec<Option<Pattern>> = test
        .iter()
        .map(|e| {
            pattern_of(e, &df_index, config.split.df_threshold)
                .ok()
                .map(|(p, _)| p)
        })
        .collect();

    let mut report = score_run(
        &config.strategy,
        &paths.predictions(),
        &test,
        &patterns,
        &training_patterns,
    )?;
    for (name, dir) in compare {
        let other = RunPaths::new(dir, config.language);
        artifacts::require_artifact(&other.predictions(), "predict")?;
        let part = score_run(name, &other.predictions(), &test, &patterns, &training_patterns)?;
        report = report.merge(part);
    }

    artifacts::ensure_writable(
        &[&paths.pattern_errors(), &paths.pattern_errors_md()],
        overwrite,
    )?;
    emit_pattern_errors(&report, ReportFormat::Tsv, &paths.pattern_errors())?;
    emit_pattern_errors(&report, ReportFormat::Markdown, &paths.pattern_errors_md())?;

    finish(
        config,
        &paths,
        "analyze",
        &[&paths.pattern_errors(), &paths.pattern_errors_md()],
        BTreeMap::from([("test".to_string(), test.fingerprint())]),
    )?;
    println!(
        "analyzed {} patterns across {} run(s) into {}",
        report.rows.len(),
        compare.len() + 1,
        paths.relative(&paths.pattern_errors()),
    );
    Ok(())
}

/// Error table for one predictions file, keeping only examples whose
/// pattern could be derived.
fn score_run(
    model: &str,
    predictions: &Path,
    test: &Corpus,
    patterns: &[Option<Pattern>],
    training: &std::collections::BTreeSet<Pattern>,
) -> Result<PatternErrorReport, CliError> {
    let rows = artifacts::read_predictions(predictions)?;
    let aligned = artifacts::align_predictions(test, &rows)?;
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    let mut kept = Vec::new();
    for ((example, value), pattern) in aligned.iter().zip(patterns) {
        let Some(pattern) = pattern else { continue };
        let pred: u8 = value.parse().map_err(|_| {
            CliError::data(format!(
                "prediction for {} is not a label: {value:?}",
                example.id
            ))
        })?;
        preds.push(pred);
        golds.push(example.label().expect("binary corpus"));
        kept.push(pattern.clone());
    }
    if kept.is_empty() {
        return Err(CliError::data(
            "no test example yielded a pattern; check split.df_threshold",
        ));
    }
    Ok(per_pattern_errors(model, &preds, &golds, &kept, training)?)
}
