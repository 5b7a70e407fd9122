pub mod analyze;
pub mod augment;
pub mod evaluate;
pub mod predict;
pub mod prepare;
pub mod train;

use std::collections::BTreeMap;
use std::path::Path;

use taxacc_core::corpus::{parse_task_file, ColumnMap};
use taxacc_core::Corpus;

use crate::artifacts::RunPaths;
use crate::config::RunConfig;
use crate::errors::CliError;
use crate::manifest::RunManifest;

pub fn load_train(config: &RunConfig) -> Result<Corpus, CliError> {
    Ok(parse_task_file(
        &config.paths.train,
        config.language,
        config.mode(),
        &ColumnMap::default(),
    )?)
}

pub fn load_test(config: &RunConfig) -> Result<Corpus, CliError> {
    let path = config.paths.test.as_ref().ok_or_else(|| {
        CliError::config("paths.test is required for predict, evaluate and analyze")
    })?;
    Ok(parse_task_file(
        path,
        config.language,
        config.mode(),
        &ColumnMap::default(),
    )?)
}

/// Write the manifest entry for a finished command.
pub fn finish(
    config: &RunConfig,
    paths: &RunPaths,
    command: &str,
    artifacts: &[&Path],
    fingerprints: BTreeMap<String, String>,
) -> Result<(), CliError> {
    let manifest_path = paths.manifest();
    let mut manifest = RunManifest::load_or_new(&manifest_path, config)?;
    manifest.record(
        command,
        artifacts.iter().map(|p| paths.relative(p)).collect(),
        fingerprints,
    );
    manifest.save(&manifest_path)
}
