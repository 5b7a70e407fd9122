//! Translation-based augmentation.
//!
//! A narrow provider contract turns (text, source, target) into translated
//! text. Responses are cached in a tab-separated file so reruns cost nothing
//! and stay deterministic; transient failures retry with backoff and
//! permanent ones flag the example without sinking the batch. Translated
//! output is filtered against a reference corpus to drop near-duplicates.

use std::collections::{BTreeSet, HashMap};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::{AugmentError, AugmentedCorpus, AugmentedExample, EditOperation};
use crate::corpus::{tokenize, Corpus, Example, Language};
use crate::par;

/// Turns text in one language into text in another.
pub trait TranslationProvider {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, AugmentError>;
}

/// Echoes its input. Useful to exercise plumbing and dedupe behavior.
#[derive(Debug, Clone, Copy)]
pub struct IdentityTranslator;

impl TranslationProvider for IdentityTranslator {
    fn translate(
        &self,
        text: &str,
        _source: Language,
        _target: Language,
    ) -> Result<String, AugmentError> {
        Ok(text.to_string())
    }
}

/// Word-by-word dictionary translation preserving punctuation and initial
/// capitalization. Tokens missing from the dictionary pass through, so rare
/// nouns survive untouched.
#[derive(Debug, Clone)]
pub struct DictionaryTranslator {
    entries: HashMap<(Language, Language), HashMap<String, String>>,
}

impl DictionaryTranslator {
    pub fn new(entries: HashMap<(Language, Language), HashMap<String, String>>) -> Self {
        DictionaryTranslator { entries }
    }

    /// Small built-in French and Italian to English vocabulary covering the
    /// bundled sample data.
    pub fn builtin() -> Self {
        let mut entries = HashMap::new();
        entries.insert(
            (Language::Fr, Language::En),
            dict(&[
                ("j'aime", "i like"),
                ("les", "the"),
                ("et", "and"),
                ("en", "in"),
                ("général", "general"),
                ("plus", "more"),
                ("précisément", "specifically"),
                ("une", "a"),
                ("sorte", "kind"),
                ("de", "of"),
                ("chiens", "dogs"),
                ("animaux", "animals"),
                ("roses", "roses"),
                ("fleurs", "flowers"),
                ("pommes", "apples"),
                ("fruits", "fruits"),
                ("marteaux", "hammers"),
                ("outils", "tools"),
                ("chaises", "chairs"),
                ("meubles", "furniture"),
                ("voitures", "cars"),
                ("véhicules", "vehicles"),
                ("oiseaux", "birds"),
                ("canards", "ducks"),
                ("arbres", "trees"),
                ("chênes", "oaks"),
                ("poissons", "fish"),
                ("truites", "trout"),
            ]),
        );
        entries.insert(
            (Language::It, Language::En),
            dict(&[
                ("mi", "i"),
                ("piacciono", "like"),
                ("i", "the"),
                ("gli", "the"),
                ("le", "the"),
                ("e", "and"),
                ("in", "in"),
                ("generale", "general"),
                ("più", "more"),
                ("precisamente", "specifically"),
                ("un", "a"),
                ("tipo", "kind"),
                ("di", "of"),
                ("cani", "dogs"),
                ("animali", "animals"),
                ("rose", "roses"),
                ("fiori", "flowers"),
                ("mele", "apples"),
                ("frutti", "fruits"),
                ("martelli", "hammers"),
                ("attrezzi", "tools"),
                ("sedie", "chairs"),
                ("mobili", "furniture"),
                ("macchine", "cars"),
                ("veicoli", "vehicles"),
                ("uccelli", "birds"),
                ("anatre", "ducks"),
                ("alberi", "trees"),
                ("querce", "oaks"),
                ("pesci", "fish"),
                ("trote", "trout"),
            ]),
        );
        DictionaryTranslator { entries }
    }
}

fn dict(pairs: &[(&str, &str)]) -> HashMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

impl TranslationProvider for DictionaryTranslator {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, AugmentError> {
        let vocab = self
            .entries
            .get(&(source, target))
            .ok_or_else(|| AugmentError::Provider {
                message: format!("no dictionary for {source} to {target}"),
            })?;
        let tokens = tokenize::tokenize(text);
        let mut out = text.to_string();
        for token in tokens.iter().rev() {
            if let Some(translated) = vocab.get(&token.text.to_lowercase()) {
                let word = if token.text.chars().next().is_some_and(char::is_uppercase) {
                    capitalize(translated)
                } else {
                    translated.clone()
                };
                out.replace_range(token.span.clone(), &word);
            }
        }
        Ok(out)
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// HTTP adapter speaking a minimal JSON contract:
/// `POST endpoint {"q", "source", "target"}` returning `{"translation"}`.
/// The bearer token comes from the `TRANSLATE_API_KEY` environment variable.
#[cfg(feature = "http")]
pub struct HttpTranslator {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

#[cfg(feature = "http")]
impl HttpTranslator {
    pub const API_KEY_VAR: &'static str = "TRANSLATE_API_KEY";

    pub fn from_env(endpoint: impl Into<String>) -> Result<HttpTranslator, AugmentError> {
        let api_key =
            std::env::var(Self::API_KEY_VAR).map_err(|_| AugmentError::Provider {
                message: format!("{} is not set", Self::API_KEY_VAR),
            })?;
        Ok(HttpTranslator {
            endpoint: endpoint.into(),
            api_key,
            client: reqwest::blocking::Client::new(),
        })
    }
}

#[cfg(feature = "http")]
impl TranslationProvider for HttpTranslator {
    fn translate(
        &self,
        text: &str,
        source: Language,
        target: Language,
    ) -> Result<String, AugmentError> {
        #[derive(serde::Serialize)]
        struct Request<'a> {
            q: &'a str,
            source: &'a str,
            target: &'a str,
        }
        #[derive(serde::Deserialize)]
        struct Response {
            translation: String,
        }
        let fail = |message: String| AugmentError::Provider { message };
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&Request {
                q: text,
                source: source.code(),
                target: target.code(),
            })
            .send()
            .map_err(|e| fail(e.to_string()))?
            .error_for_status()
            .map_err(|e| fail(e.to_string()))?;
        let body: Response = response.json().map_err(|e| fail(e.to_string()))?;
        Ok(body.translation)
    }
}

/// Persistent (text, source, target) → translation store.
///
/// One record per line: `source<TAB>target<TAB>input<TAB>output`, with
/// backslash escapes for tabs, newlines and backslashes inside text fields.
#[derive(Debug)]
pub struct TranslationCache {
    path: PathBuf,
    map: HashMap<(Language, Language, String), String>,
}

impl TranslationCache {
    pub fn open(path: &Path) -> Result<TranslationCache, AugmentError> {
        let mut map = HashMap::new();
        if path.exists() {
            let raw = std::fs::read_to_string(path)?;
            for (i, line) in raw.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 4 {
                    return Err(AugmentError::BadRecord {
                        message: format!("cache line {}: expected 4 fields", i + 1),
                    });
                }
                let src: Language = fields[0].parse().map_err(|_| AugmentError::BadRecord {
                    message: format!("cache line {}: bad source language", i + 1),
                })?;
                let tgt: Language = fields[1].parse().map_err(|_| AugmentError::BadRecord {
                    message: format!("cache line {}: bad target language", i + 1),
                })?;
                map.insert((src, tgt, unescape(fields[2])), unescape(fields[3]));
            }
        }
        Ok(TranslationCache {
            path: path.to_path_buf(),
            map,
        })
    }

    pub fn get(&self, text: &str, source: Language, target: Language) -> Option<&str> {
        self.map
            .get(&(source, target, text.to_string()))
            .map(String::as_str)
    }

    pub fn insert(
        &mut self,
        text: &str,
        source: Language,
        target: Language,
        output: &str,
    ) -> Result<(), AugmentError> {
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(
            file,
            "{}\t{}\t{}\t{}",
            source,
            target,
            escape(text),
            escape(output)
        )?;
        self.map
            .insert((source, target, text.to_string()), output.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

/// Retry schedule for provider calls: attempt, then back off linearly.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> RetryPolicy {
        RetryPolicy {
            max_attempts: 3,
            backoff: Duration::from_millis(10),
        }
    }
}

/// Outcome of [`translate_corpus`]: the translated rows plus bookkeeping.
#[derive(Debug)]
pub struct TranslationReport {
    /// Successfully translated rows, in source-corpus order.
    pub corpus: AugmentedCorpus,
    /// Ids of examples whose translation failed after all retries.
    pub failed: Vec<String>,
    /// Provider invocations issued, retries included.
    pub provider_calls: usize,
    /// Examples answered straight from the cache.
    pub cache_hits: usize,
}

/// Translate every example into `target`, going through the cache.
///
/// Cache misses are translated in parallel (each with its own retry
/// schedule) and written back in corpus order. Examples that still fail are
/// listed in the report and left out of the output corpus; everything else
/// keeps its id lineage, annotation and source language.
pub fn translate_corpus(
    corpus: &Corpus,
    target: Language,
    provider: &(dyn TranslationProvider + Sync),
    cache: &mut TranslationCache,
    retry: &RetryPolicy,
) -> Result<TranslationReport, AugmentError> {
    if corpus.language == target {
        return Err(AugmentError::SameLanguage(target));
    }
    let source = corpus.language;

    let misses: Vec<&Example> = corpus
        .iter()
        .filter(|e| cache.get(&e.text, source, target).is_none())
        .collect();
    let cache_hits = corpus.len() - misses.len();

    let results = par::map(&misses, |e| {
        let mut calls = 0usize;
        let mut last_error = String::new();
        for attempt in 1..=retry.max_attempts.max(1) {
            calls += 1;
            match provider.translate(&e.text, source, target) {
                Ok(text) => return (calls, Ok(text)),
                Err(err) => {
                    last_error = err.to_string();
                    if attempt < retry.max_attempts {
                        std::thread::sleep(retry.backoff * attempt);
                    }
                }
            }
        }
        (calls, Err(last_error))
    });

    let mut provider_calls = 0;
    let mut translated: HashMap<&str, String> = HashMap::new();
    let mut failed = Vec::new();
    for (e, (calls, outcome)) in misses.iter().zip(results) {
        provider_calls += calls;
        match outcome {
            Ok(text) => {
                cache.insert(&e.text, source, target, &text)?;
                translated.insert(e.text.as_str(), text);
            }
            Err(_) => failed.push(e.id.clone()),
        }
    }

    let mut items = Vec::with_capacity(corpus.len() - failed.len());
    for e in corpus.iter() {
        let text = match translated.get(e.text.as_str()) {
            Some(t) => t.clone(),
            None => match cache.get(&e.text, source, target) {
                Some(t) => t.to_string(),
                None => continue, // failed above
            },
        };
        items.push(AugmentedExample {
            example: Example {
                id: format!("{}-tr", e.id),
                text,
                language: target,
                annotation: e.annotation,
            },
            source_id: e.id.clone(),
            operation: EditOperation::Translate,
            edits: 0,
            source_language: source,
            skipped: false,
        });
    }

    Ok(TranslationReport {
        corpus: AugmentedCorpus {
            language: target,
            items,
        },
        failed,
        provider_calls,
        cache_hits,
    })
}

/// How much [`dedupe_against`] dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DedupeReport {
    pub examined: usize,
    pub dropped: usize,
}

impl DedupeReport {
    pub fn dropped_fraction(&self) -> f64 {
        if self.examined == 0 {
            0.0
        } else {
            self.dropped as f64 / self.examined as f64
        }
    }
}

/// Drop rows whose normalized text (case-fold, whitespace collapse) already
/// appears in the reference corpus.
pub fn dedupe_against(
    translated: &AugmentedCorpus,
    reference: &Corpus,
) -> Result<(AugmentedCorpus, DedupeReport), AugmentError> {
    if translated.language != reference.language {
        return Err(AugmentError::LanguageMismatch {
            left: translated.language,
            right: reference.language,
        });
    }
    let seen: BTreeSet<String> = reference.iter().map(|e| normalize(&e.text)).collect();
    let mut kept = Vec::new();
    let mut dropped = 0;
    for item in &translated.items {
        if seen.contains(&normalize(&item.example.text)) {
            dropped += 1;
        } else {
            kept.push(item.clone());
        }
    }
    let report = DedupeReport {
        examined: translated.len(),
        dropped,
    };
    Ok((
        AugmentedCorpus {
            language: translated.language,
            items: kept,
        },
        report,
    ))
}

/// Comparison form used by the duplicate filter: case-folded with
/// whitespace runs collapsed to single spaces.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}
