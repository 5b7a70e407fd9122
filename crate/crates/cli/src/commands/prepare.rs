//! Split the training data and derive its pattern inventory.

use std::collections::BTreeMap;

use taxacc_core::corpus::{build_df_index, pattern_of, split_dev_validation, SplitConfig};
use taxacc_core::Pattern;

use crate::artifacts::{self, RunPaths};
use crate::config::RunConfig;
use crate::errors::CliError;

use super::{finish, load_train};

pub fn run(config: &RunConfig, overwrite: bool) -> Result<(), CliError> {
    let corpus = load_train(config)?;
    let df_index = build_df_index(&corpus)?;

    let held_out: Vec<Pattern> = config
        .split
        .held_out
        .iter()
        .map(|template| Pattern {
            template: template.clone(),
            language: config.language,
        })
        .collect();
    let split = split_dev_validation(
        &corpus,
        &df_index,
        &held_out,
        &SplitConfig {
            dev_fraction: config.split.dev_fraction,
            seed: config.seed,
            df_threshold: config.split.df_threshold,
        },
    )?;

    let patterns: Vec<(String, Pattern, bool)> = corpus
        .iter()
        .filter_map(|example| {
            pattern_of(example, &df_index, config.split.df_threshold)
                .ok()
                .map(|(pattern, fell_back)| (example.id.clone(), pattern, fell_back))
        })
        .collect();

    let paths = RunPaths::new(&config.run_dir, config.language);
    let outputs = [
        paths.dev(),
        paths.val(),
        paths.df_index(),
        paths.patterns(),
        paths.held_out(),
    ];
    artifacts::ensure_writable(&outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(), overwrite)?;

    artifacts::write_task_tsv(&paths.dev(), &split.dev)?;
    artifacts::write_task_tsv(&paths.val(), &split.val)?;
    artifacts::write_df_index(&paths.df_index(), &df_index)?;
    artifacts::write_patterns(&paths.patterns(), &patterns)?;
    artifacts::write_held_out(&paths.held_out(), &split.held_out_patterns)?;

    finish(
        config,
        &paths,
        "prepare",
        &outputs.iter().map(|p| p.as_path()).collect::<Vec<_>>(),
        BTreeMap::from([("train".to_string(), corpus.fingerprint())]),
    )?;

    println!(
        "prepared {}: {} dev / {} val examples, {} patterns ({} held out)",
        config.language,
        split.dev.len(),
        split.val.len(),
        patterns
            .iter()
            .map(|(_, p, _)| p)
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
        split.held_out_patterns.len(),
    );
    Ok(())
}
