//! Score predictions against the test labels and render metric tables.

use std::collections::BTreeMap;

use taxacc_core::eval::{
    binary_metrics, render_metrics, spearman_rho, LanguageMetric, MetricsReport, ReportFormat,
};
use taxacc_core::{Language, TaskMode};

use crate::artifacts::{self, RunPaths};
use crate::config::RunConfig;
use crate::errors::CliError;

use super::{finish, load_test};

pub fn run(config: &RunConfig, overwrite: bool) -> Result<(), CliError> {
    let paths = RunPaths::new(&config.run_dir, config.language);
    let test = load_test(config)?;
    artifacts::require_artifact(&paths.predictions(), "predict")?;
    let predictions = artifacts::read_predictions(&paths.predictions())?;
    let aligned = artifacts::align_predictions(&test, &predictions)?;

    let metric = match config.mode() {
        TaskMode::Binary => {
            let mut preds = Vec::with_capacity(aligned.len());
            let mut golds = Vec::with_capacity(aligned.len());
            for (example, value) in &aligned {
                let pred: u8 = value.parse().map_err(|_| {
                    CliError::data(format!("prediction for {} is not a label: {value:?}", example.id))
                })?;
                preds.push(pred);
                golds.push(example.label().expect("binary corpus"));
            }
            LanguageMetric::Binary(binary_metrics(&preds, &golds)?)
        }
        TaskMode::Likert => {
            let mut preds = Vec::with_capacity(aligned.len());
            let mut golds = Vec::with_capacity(aligned.len());
            for (example, value) in &aligned {
                let pred: f64 = value.parse().map_err(|_| {
                    CliError::data(format!("prediction for {} is not a score: {value:?}", example.id))
                })?;
                preds.push(pred);
                golds.push(example.score().expect("likert corpus"));
            }
            LanguageMetric::Graded(spearman_rho(&preds, &golds)?)
        }
    };

    artifacts::ensure_writable(&[&paths.metrics_tsv(), &paths.metrics_json()], overwrite)?;
    let body = serde_json::to_string_pretty(&metric)
        .map_err(|e| CliError::data(format!("cannot serialize metrics: {e}")))?;
    std::fs::write(paths.metrics_json(), body).map_err(|e| {
        CliError::data(format!("cannot write {}: {e}", paths.metrics_json().display()))
    })?;

    let report = MetricsReport::new(BTreeMap::from([(config.language, metric.clone())]))?;
    let rendered = render_metrics(&report, ReportFormat::Tsv);
    std::fs::write(paths.metrics_tsv(), rendered).map_err(|e| {
        CliError::data(format!("cannot write {}: {e}", paths.metrics_tsv().display()))
    })?;

    // once every language has a metrics file in this run dir, roll them up;
    // a mismatched sibling (say a likert run sharing the dir) just means no
    // roll-up, not a failed evaluation
    let mut wrote_global = false;
    if let Some(full) = collect_all_languages(&paths)? {
        if let Ok(full_report) = MetricsReport::new(full) {
            if full_report.global.is_some() {
                let rendered = render_metrics(&full_report, ReportFormat::Tsv);
                std::fs::write(paths.global(), rendered).map_err(|e| {
                    CliError::data(format!("cannot write {}: {e}", paths.global().display()))
                })?;
                wrote_global = true;
            }
        }
    }

    finish(
        config,
        &paths,
        "evaluate",
        &[&paths.metrics_tsv(), &paths.metrics_json()],
        BTreeMap::from([("test".to_string(), test.fingerprint())]),
    )?;

    match &metric {
        LanguageMetric::Binary(m) => println!(
            "{}: precision {:.2} recall {:.2} f1 {:.2}",
            config.language,
            100.0 * m.precision,
            100.0 * m.recall,
            100.0 * m.f1,
        ),
        LanguageMetric::Graded(r) => {
            println!("{}: rho {:.3} over {} pairs", config.language, r.rho, r.n)
        }
    }
    if wrote_global {
        println!("all languages evaluated; wrote {}", paths.relative(&paths.global()));
    }
    Ok(())
}

/// Metrics for every task language, if each has been evaluated into this
/// run dir and the tasks agree.
fn collect_all_languages(
    paths: &RunPaths,
) -> Result<Option<BTreeMap<Language, LanguageMetric>>, CliError> {
    let mut out = BTreeMap::new();
    for language in Language::ALL {
        let sibling = RunPaths::new(&paths.run_dir, language);
        let path = sibling.metrics_json();
        if !path.exists() {
            return Ok(None);
        }
        let raw = std::fs::read_to_string(&path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        let metric: LanguageMetric = serde_json::from_str(&raw)
            .map_err(|e| CliError::data(format!("cannot parse {}: {e}", path.display())))?;
        out.insert(language, metric);
    }
    Ok(Some(out))
}
