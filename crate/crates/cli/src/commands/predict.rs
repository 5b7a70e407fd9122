//! Run the saved model over the test file and write one prediction per row.

use std::collections::BTreeMap;

use taxacc_core::baseline::{predict_scores, TfidfSvmModel};
use taxacc_core::pipeline::predict_labels;

use crate::artifacts::{self, RunPaths};
use crate::config::{build_backend, build_encoder_from_snapshot, ModelKind, RunConfig};
use crate::errors::CliError;

use super::train::{RegressorArtifact, REGRESSOR_FORMAT};
use super::{finish, load_test};

pub fn run(config: &RunConfig, overwrite: bool) -> Result<(), CliError> {
    let paths = RunPaths::new(&config.run_dir, config.language);
    let test = load_test(config)?;
    artifacts::require_artifact(&paths.model(), "train")?;

    let rendered: Vec<String> = match config.model_kind()? {
        ModelKind::Pipeline(_) => {
            let mut backend = build_backend(config)?;
            backend.load(&paths.model())?;
            predict_labels(backend.as_ref(), &test)?
                .into_iter()
                .map(|l| l.to_string())
                .collect()
        }
        ModelKind::TfidfSvm => {
            let model = TfidfSvmModel::load(&paths.model())?;
            let texts: Vec<String> = test.iter().map(|e| e.text.clone()).collect();
            model
                .predict(&texts)
                .into_iter()
                .map(|l| l.to_string())
                .collect()
        }
        ModelKind::Regressor(_) => {
            let raw = std::fs::read_to_string(paths.model()).map_err(|e| {
                CliError::data(format!("cannot read {}: {e}", paths.model().display()))
            })?;
            let artifact: RegressorArtifact = serde_json::from_str(&raw).map_err(|e| {
                CliError::data(format!("cannot parse {}: {e}", paths.model().display()))
            })?;
            if artifact.format != REGRESSOR_FORMAT {
                return Err(CliError::data(format!(
                    "{} is not a {REGRESSOR_FORMAT} model",
                    paths.model().display()
                )));
            }
            let encoder = build_encoder_from_snapshot(
                &artifact.encoder.spec,
                artifact.encoder.dim,
                artifact.encoder.ngram_max,
            )?;
            let texts: Vec<String> = test.iter().map(|e| e.text.clone()).collect();
            let embeddings = encoder.encode(&texts)?;
            predict_scores(&artifact.model, &embeddings, artifact.clamp)?
                .into_iter()
                .map(|s| s.to_string())
                .collect()
        }
    };

    artifacts::ensure_writable(&[&paths.predictions()], overwrite)?;
    let rows: Vec<(String, String)> = test
        .iter()
        .map(|e| e.id.clone())
        .zip(rendered.iter().cloned())
        .collect();
    artifacts::write_predictions(&paths.predictions(), &rows)?;

    finish(
        config,
        &paths,
        "predict",
        &[&paths.predictions()],
        BTreeMap::from([("test".to_string(), test.fingerprint())]),
    )?;
    println!(
        "predicted {} rows for {} into {}",
        rendered.len(),
        config.language,
        paths.relative(&paths.predictions()),
    );
    Ok(())
}
