//! Data augmentation with provenance.
//!
//! Two families of augmentation feed the training pipeline: contextual token
//! edits (insertion everywhere, substitution on positive sentences only) and
//! translation from the other task languages, followed by duplicate
//! filtering. Every produced row remembers where it came from.

mod fill;
mod translate;

pub use fill::{
    augment_binary_corpus, augment_binary_corpus_with, contextual_insert, contextual_substitute,
    AbstainFill, AugmentOptions, Candidate, ConstantFill, ContextualFillModel, LexiconFill, MASK,
};
pub use translate::{
    dedupe_against, normalize, translate_corpus, DedupeReport, DictionaryTranslator,
    IdentityTranslator, RetryPolicy, TranslationCache, TranslationProvider, TranslationReport,
};

#[cfg(feature = "http")]
pub use translate::HttpTranslator;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Annotation, Corpus, CorpusError, Example, Language, TaskMode};

/// Which augmentation produced a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOperation {
    Insert,
    Substitute,
    Translate,
}

impl EditOperation {
    pub fn tag(self) -> &'static str {
        match self {
            EditOperation::Insert => "insert",
            EditOperation::Substitute => "substitute",
            EditOperation::Translate => "translate",
        }
    }
}

impl fmt::Display for EditOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for EditOperation {
    type Err = AugmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "insert" => Ok(EditOperation::Insert),
            "substitute" => Ok(EditOperation::Substitute),
            "translate" => Ok(EditOperation::Translate),
            other => Err(AugmentError::BadRecord {
                message: format!("unknown operation `{other}`"),
            }),
        }
    }
}

/// One augmented sentence with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedExample {
    /// The output sentence as a regular example (fresh id, copied target).
    pub example: Example,
    /// Id of the example this row was derived from.
    pub source_id: String,
    pub operation: EditOperation,
    /// Number of token edits (0 for translation or skipped rows).
    pub edits: usize,
    /// Language of the source sentence (differs from `example.language`
    /// only for translation).
    pub source_language: Language,
    /// True when augmentation could not be applied and the source text was
    /// passed through unchanged.
    pub skipped: bool,
}

/// An ordered batch of augmented rows in one language.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCorpus {
    pub language: Language,
    pub items: Vec<AugmentedExample>,
}

impl AugmentedCorpus {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AugmentedExample> {
        self.items.iter()
    }

    /// Drop provenance, keeping every row (including flagged pass-throughs)
    /// as a plain corpus.
    pub fn to_corpus(&self) -> Result<Corpus, CorpusError> {
        Corpus::new(
            self.language,
            self.items.iter().map(|a| a.example.clone()).collect(),
        )
    }

    /// Write rows as tab-separated values with provenance columns.
    ///
    /// Tabs and newlines inside sentences are collapsed to spaces so the
    /// format stays line-oriented.
    pub fn write_tsv(&self, path: &Path) -> Result<(), AugmentError> {
        let mut out = String::new();
        out.push_str("id\tsentence\ttarget\tsource_id\toperation\tedits\tsource_language\tflagged\n");
        for item in &self.items {
            let target = match item.example.annotation {
                Annotation::Label(l) => l.to_string(),
                Annotation::Score(s) => format!("{s}"),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                flatten(&item.example.id),
                flatten(&item.example.text),
                target,
                flatten(&item.source_id),
                item.operation,
                item.edits,
                item.source_language,
                u8::from(item.skipped),
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read rows written by [`AugmentedCorpus::write_tsv`].
    pub fn read_tsv(
        path: &Path,
        language: Language,
        mode: TaskMode,
    ) -> Result<AugmentedCorpus, AugmentError> {
        let raw = std::fs::read_to_string(path)?;
        let mut lines = raw.lines();
        let header = lines.next().unwrap_or_default();
        let expected = "id\tsentence\ttarget\tsource_id\toperation\tedits\tsource_language\tflagged";
        if header.trim_end_matches('\r') != expected {
            return Err(AugmentError::BadRecord {
                message: format!("unexpected header `{header}`"),
            });
        }
        let mut items = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 8 {
                return Err(AugmentError::BadRecord {
                    message: format!("row {}: expected 8 columns, found {}", i + 2, fields.len()),
                });
            }
            let bad = |message: String| AugmentError::BadRecord { message };
            let annotation = match mode {
                TaskMode::Binary => Annotation::Label(
                    fields[2]
                        .parse()
                        .map_err(|_| bad(format!("row {}: bad label", i + 2)))?,
                ),
                TaskMode::Likert => Annotation::Score(
                    fields[2]
                        .parse()
                        .map_err(|_| bad(format!("row {}: bad score", i + 2)))?,
                ),
            };
            items.push(AugmentedExample {
                example: Example {
                    id: fields[0].to_string(),
                    text: fields[1].to_string(),
                    language,
                    annotation,
                },
                source_id: fields[3].to_string(),
                operation: fields[4].parse()?,
                edits: fields[5]
                    .parse()
                    .map_err(|_| bad(format!("row {}: bad edit count", i + 2)))?,
                source_language: fields[6]
                    .parse()
                    .map_err(|_| bad(format!("row {}: bad source language", i + 2)))?,
                skipped: fields[7] == "1",
            });
        }
        Ok(AugmentedCorpus { language, items })
    }
}

fn flatten(text: &str) -> String {
    if text.contains(['\t', '\n', '\r']) {
        text.replace(['\t', '\n', '\r'], " ")
    } else {
        text.to_string()
    }
}

/// Errors raised by the augmentation operations.
#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("augmentation requires binary labels, found a score on `{id}`")]
    NotBinary { id: String },
    #[error("substitution is restricted to label-1 sentences; `{id}` is not")]
    SubstituteOnNegative { id: String },
    #[error("example `{id}` has no tokens to edit")]
    EmptyText { id: String },
    #[error("max_edits must be at least 1")]
    NoEditBudget,
    #[error("translation target {0} equals the source language")]
    SameLanguage(Language),
    #[error("languages differ: {left} vs {right}")]
    LanguageMismatch { left: Language, right: Language },
    #[error("translation provider failed: {message}")]
    Provider { message: String },
    #[error("malformed augmented record: {message}")]
    BadRecord { message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
