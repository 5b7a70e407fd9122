//! Run-directory layout and small artifact readers/writers.
//!
//! Every artifact name carries the language code, so one run directory can
//! host all three languages side by side. Directories are append-only:
//! writing over an existing artifact needs `--overwrite`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use taxacc_core::corpus::DfIndex;
use taxacc_core::{Corpus, Language, Pattern, TaskMode};

use crate::errors::CliError;

#[derive(Debug, Clone)]
pub struct RunPaths {
    pub run_dir: PathBuf,
    pub language: Language,
}

impl RunPaths {
    pub fn new(run_dir: &Path, language: Language) -> RunPaths {
        RunPaths {
            run_dir: run_dir.to_path_buf(),
            language,
        }
    }

    fn file(&self, sub: &str, stem: &str, ext: &str) -> PathBuf {
        self.run_dir
            .join(sub)
            .join(format!("{stem}_{}.{ext}", self.language.code()))
    }

    pub fn dev(&self) -> PathBuf {
        self.file("prepare", "dev", "tsv")
    }

    pub fn val(&self) -> PathBuf {
        self.file("prepare", "val", "tsv")
    }

    pub fn df_index(&self) -> PathBuf {
        self.file("prepare", "df_index", "tsv")
    }

    pub fn patterns(&self) -> PathBuf {
        self.file("prepare", "patterns", "tsv")
    }

    pub fn held_out(&self) -> PathBuf {
        self.file("prepare", "held_out", "tsv")
    }

    pub fn nlpaug(&self) -> PathBuf {
        self.file("augment", "nlpaug", "tsv")
    }

    pub fn translated(&self) -> PathBuf {
        self.file("augment", "translated", "tsv")
    }

    pub fn translation_report(&self) -> PathBuf {
        self.file("augment", "translation_report", "json")
    }

    pub fn model(&self) -> PathBuf {
        self.file("train", "model", "json")
    }

    pub fn plan(&self) -> PathBuf {
        self.file("train", "plan", "json")
    }

    pub fn trace(&self) -> PathBuf {
        self.file("train", "trace", "log")
    }

    pub fn predictions(&self) -> PathBuf {
        self.file("predict", "predictions", "tsv")
    }

    pub fn metrics_tsv(&self) -> PathBuf {
        self.file("evaluate", "metrics", "tsv")
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.file("evaluate", "metrics", "json")
    }

    pub fn global(&self) -> PathBuf {
        self.run_dir.join("evaluate").join("global.tsv")
    }

    pub fn pattern_errors(&self) -> PathBuf {
        self.run_dir.join("analyze").join("pattern_errors.tsv")
    }

    pub fn pattern_errors_md(&self) -> PathBuf {
        self.run_dir.join("analyze").join("pattern_errors.md")
    }

    pub fn manifest(&self) -> PathBuf {
        self.run_dir
            .join(format!("manifest_{}.json", self.language.code()))
    }

    /// Path relative to the run directory, for manifests and messages.
    pub fn relative(&self, path: &Path) -> String {
        path.strip_prefix(&self.run_dir)
            .unwrap_or(path)
            .display()
            .to_string()
    }
}

/// Refuse to clobber existing artifacts unless asked, then make room.
pub fn ensure_writable(paths: &[&Path], overwrite: bool) -> Result<(), CliError> {
    if !overwrite {
        if let Some(existing) = paths.iter().find(|p| p.exists()) {
            return Err(CliError::config(format!(
                "{} already exists; pass --overwrite or pick a fresh --run-dir",
                existing.display()
            )));
        }
    }
    for path in paths {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    Ok(())
}

pub fn require_artifact(path: &Path, produced_by: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{} is missing; run `taxacc {produced_by}` first",
            path.display()
        )))
    }
}

fn write_atomically(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Write a corpus back out in the task-file shape it was parsed from.
pub fn write_task_tsv(path: &Path, corpus: &Corpus) -> Result<(), CliError> {
    let target = match corpus.mode() {
        Some(TaskMode::Likert) => "avg",
        _ => "labels",
    };
    let mut out = format!("id\tsentence\t{target}\n");
    for example in corpus.iter() {
        let value = match (example.label(), example.score()) {
            (Some(label), _) => label.to_string(),
            (_, Some(score)) => score.to_string(),
            _ => unreachable!("annotation is one of the two"),
        };
        out.push_str(&format!("{}\t{}\t{}\n", example.id, example.text, value));
    }
    write_atomically(path, &out)
}

pub fn write_df_index(path: &Path, index: &DfIndex) -> Result<(), CliError> {
    let mut out = format!("documents\t{}\n", index.num_documents);
    for (token, df) in index.iter() {
        out.push_str(&format!("{token}\t{df}\n"));
    }
    write_atomically(path, &out)
}

/// Per-example derived patterns: id, template, whether extraction fell back
/// to the two rarest tokens.
pub fn write_patterns(path: &Path, rows: &[(String, Pattern, bool)]) -> Result<(), CliError> {
    let mut out = String::from("id\ttemplate\tfallback\n");
    for (id, pattern, fallback) in rows {
        out.push_str(&format!(
            "{id}\t{}\t{}\n",
            pattern.template,
            u8::from(*fallback)
        ));
    }
    write_atomically(path, &out)
}

pub fn read_pattern_set(path: &Path, language: Language) -> Result<BTreeSet<Pattern>, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut set = BTreeSet::new();
    for line in raw.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (_id, template) = (fields.next(), fields.next());
        if let Some(template) = template {
            set.insert(Pattern {
                template: template.to_string(),
                language,
            });
        }
    }
    Ok(set)
}

pub fn write_held_out(path: &Path, patterns: &BTreeSet<Pattern>) -> Result<(), CliError> {
    let mut out = String::from("template\n");
    for pattern in patterns {
        out.push_str(&pattern.template);
        out.push('\n');
    }
    write_atomically(path, &out)
}

/// Predictions aligned with a test corpus: id, predicted label or score.
pub fn write_predictions(path: &Path, rows: &[(String, String)]) -> Result<(), CliError> {
    let mut out = String::from("id\tprediction\n");
    for (id, value) in rows {
        out.push_str(&format!("{id}\t{value}\n"));
    }
    write_atomically(path, &out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let raw = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (number, line) in raw.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next()) {
            (Some(id), Some(value)) => rows.push((id.to_string(), value.to_string())),
            _ => {
                return Err(CliError::data(format!(
                    "{} row {}: expected id and prediction",
                    path.display(),
                    number + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// Pair predictions with gold annotations by id, preserving corpus order.
pub fn align_predictions<'a>(
    corpus: &'a Corpus,
    predictions: &'a [(String, String)],
) -> Result<Vec<(&'a taxacc_core::Example, &'a str)>, CliError> {
    if predictions.len() != corpus.len() {
        return Err(CliError::data(format!(
            "{} predictions for {} test examples",
            predictions.len(),
            corpus.len()
        )));
    }
    let by_id: std::collections::HashMap<&str, &str> = predictions
        .iter()
        .map(|(id, value)| (id.as_str(), value.as_str()))
        .collect();
    corpus
        .iter()
        .map(|example| {
            by_id
                .get(example.id.as_str())
                .map(|value| (example, *value))
                .ok_or_else(|| {
                    CliError::data(format!("no prediction for test example {}", example.id))
                })
        })
        .collect()
}
