//! Run configuration: a single TOML file plus a few flag overrides.
//!
//! Every command re-validates the whole file before doing work, so a config
//! that drives one command successfully will not blow up three commands
//! later over a typo.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taxacc_core::augment::{
    AbstainFill, ConstantFill, ContextualFillModel, DictionaryTranslator, IdentityTranslator,
    LexiconFill, TranslationProvider,
};
use taxacc_core::baseline::{HashingEncoder, SentenceEncoder, SubprocessEncoder};
use taxacc_core::pipeline::{BackendRegistry, ClassifierBackend, Strategy, SubprocessBackend};
use taxacc_core::{Language, TaskMode};

use crate::errors::CliError;

pub const BINARY_BASELINE: &str = "tfidf-svm";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "binary" or "likert".
    pub task: String,
    pub language: Language,
    /// Binary task: a fine-tuning strategy id or "tfidf-svm".
    /// Likert task: a regressor kind (ols, knn, tree, svr).
    pub strategy: String,
    #[serde(default)]
    pub seed: u64,
    pub run_dir: PathBuf,
    pub paths: PathsSection,
    #[serde(default)]
    pub providers: ProvidersSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub hyper: HyperSection,
    #[serde(default)]
    pub baseline: BaselineSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub train: PathBuf,
    pub test: Option<PathBuf>,
    pub commonsense: Option<PathBuf>,
    /// Task files in other languages to translate into `language`.
    #[serde(default)]
    pub translation_sources: Vec<PathBuf>,
    /// Defaults to `<run_dir>/augment/translation_cache_<lang>.tsv`.
    pub translation_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProvidersSection {
    /// "lexicon", "constant:<word>" or "abstain".
    pub fill: String,
    /// "dictionary", "identity" or "http:<endpoint>".
    pub translator: String,
    /// "hashed-linear" or "subprocess:<command...>".
    pub backend: String,
    /// "hashing" or "subprocess:<command...>".
    pub encoder: String,
}

impl Default for ProvidersSection {
    fn default() -> Self {
        ProvidersSection {
            fill: "lexicon".into(),
            translator: "dictionary".into(),
            backend: "hashed-linear".into(),
            encoder: "hashing".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub dev_fraction: f64,
    pub df_threshold: f64,
    /// Pattern templates forced out of the dev slice.
    pub held_out: Vec<String>,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            dev_fraction: 0.3,
            df_threshold: 0.05,
            held_out: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentSection {
    pub insert_variants: usize,
    pub substitute_variants: usize,
    pub max_edits: usize,
}

impl Default for AugmentSection {
    fn default() -> Self {
        AugmentSection {
            insert_variants: 1,
            substitute_variants: 1,
            max_edits: 2,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperSection {
    pub stage1_lr: Option<f64>,
    pub stage2_lr: Option<f64>,
    pub epochs: Option<u32>,
    pub batch_size: Option<u32>,
    pub include_original_in_stage1: bool,
    /// Feature width of the built-in hashed-linear backend.
    pub backend_dim: Option<usize>,
    /// Multiplier turning transformer-scale learning rates into steps the
    /// hashed-linear backend can learn from.
    pub backend_lr_scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub encoder_dim: usize,
    pub encoder_ngram: usize,
    pub svm_c: f64,
    pub ngram_max: usize,
    pub char_ngrams: bool,
    pub knn_k: usize,
    pub svr_epsilon: f64,
    pub svr_c: f64,
    pub clamp: bool,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            encoder_dim: 256,
            encoder_ngram: 2,
            svm_c: 1.0,
            ngram_max: 3,
            char_ngrams: false,
            knn_k: 5,
            svr_epsilon: 0.2,
            svr_c: 1.0,
            clamp: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub run_dir: Option<PathBuf>,
    pub language: Option<String>,
    pub strategy: Option<String>,
}

/// What the strategy field resolves to for this task.
#[derive(Debug, Clone)]
pub enum ModelKind {
    Pipeline(Strategy),
    TfidfSvm,
    Regressor(taxacc_core::baseline::RegressorKind),
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &ConfigOverrides) -> Result<RunConfig, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&raw)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))?;

        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(run_dir) = &overrides.run_dir {
            config.run_dir = run_dir.clone();
        }
        if let Some(language) = &overrides.language {
            config.language = language
                .parse()
                .map_err(|e| CliError::config(format!("--language: {e}")))?;
        }
        if let Some(strategy) = &overrides.strategy {
            config.strategy = strategy.clone();
        }

        config.validate()?;
        Ok(config)
    }

    pub fn mode(&self) -> TaskMode {
        match self.task.as_str() {
            "likert" => TaskMode::Likert,
            _ => TaskMode::Binary,
        }
    }

    pub fn model_kind(&self) -> Result<ModelKind, CliError> {
        match self.mode() {
            TaskMode::Binary => {
                if self.strategy == BINARY_BASELINE {
                    Ok(ModelKind::TfidfSvm)
                } else {
                    let strategy: Strategy = self.strategy.parse()?;
                    Ok(ModelKind::Pipeline(strategy))
                }
            }
            TaskMode::Likert => {
                let kind = self
                    .strategy
                    .parse::<taxacc_core::baseline::RegressorKind>()
                    .map_err(|e| CliError::config(e.to_string()))?;
                Ok(ModelKind::Regressor(kind))
            }
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.task.as_str(), "binary" | "likert") {
            return Err(CliError::config(format!(
                "task must be \"binary\" or \"likert\", got {:?}",
                self.task
            )));
        }
        self.model_kind()?;

        if !(self.split.dev_fraction > 0.0 && self.split.dev_fraction < 1.0) {
            return Err(CliError::config(format!(
                "split.dev_fraction {} must lie strictly between 0 and 1",
                self.split.dev_fraction
            )));
        }
        if !(self.split.df_threshold > 0.0 && self.split.df_threshold <= 1.0) {
            return Err(CliError::config(format!(
                "split.df_threshold {} must lie in (0, 1]",
                self.split.df_threshold
            )));
        }
        if self.augment.max_edits == 0 {
            return Err(CliError::config("augment.max_edits must be at least 1"));
        }
        for (name, value) in [
            ("baseline.svm_c", self.baseline.svm_c),
            ("baseline.svr_c", self.baseline.svr_c),
        ] {
            if !(value > 0.0) {
                return Err(CliError::config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.baseline.svr_epsilon < 0.0 {
            return Err(CliError::config("baseline.svr_epsilon must be non-negative"));
        }
        if self.baseline.encoder_dim == 0 || self.baseline.ngram_max == 0 || self.baseline.encoder_ngram == 0
        {
            return Err(CliError::config(
                "baseline dimensions and n-gram orders must be at least 1",
            ));
        }
        if self.baseline.knn_k == 0 {
            return Err(CliError::config("baseline.knn_k must be at least 1"));
        }

        self.check_path("paths.train", Some(&self.paths.train))?;
        self.check_path("paths.test", self.paths.test.as_deref())?;
        self.check_path("paths.commonsense", self.paths.commonsense.as_deref())?;
        for source in &self.paths.translation_sources {
            self.check_path("paths.translation_sources", Some(source))?;
            let language = Language::from_path(source).ok_or_else(|| {
                CliError::config(format!(
                    "cannot infer a language from {} (expected a _en/_fr/_it file stem suffix)",
                    source.display()
                ))
            })?;
            if language == self.language {
                return Err(CliError::config(format!(
                    "translation source {} is already {}",
                    source.display(),
                    self.language
                )));
            }
        }

        // provider strings must parse even for commands that ignore them
        parse_fill_spec(&self.providers.fill)?;
        parse_translator_spec(&self.providers.translator)?;
        parse_worker_spec("providers.backend", &self.providers.backend, "hashed-linear")?;
        parse_worker_spec("providers.encoder", &self.providers.encoder, "hashing")?;
        Ok(())
    }

    fn check_path(&self, key: &str, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) if !p.exists() => Err(CliError::config(format!(
                "{key} points at {} which does not exist",
                p.display()
            ))),
            _ => Ok(()),
        }
    }

    pub fn translation_cache_path(&self) -> PathBuf {
        self.paths.translation_cache.clone().unwrap_or_else(|| {
            self.run_dir
                .join("augment")
                .join(format!("translation_cache_{}.tsv", self.language.code()))
        })
    }
}

enum FillSpec {
    Lexicon,
    Constant(String),
    Abstain,
}

fn parse_fill_spec(spec: &str) -> Result<FillSpec, CliError> {
    if spec == "lexicon" {
        Ok(FillSpec::Lexicon)
    } else if spec == "abstain" {
        Ok(FillSpec::Abstain)
    } else if let Some(word) = spec.strip_prefix("constant:") {
        if word.is_empty() {
            Err(CliError::config("providers.fill constant needs a word"))
        } else {
            Ok(FillSpec::Constant(word.to_string()))
        }
    } else {
        Err(CliError::config(format!(
            "providers.fill {spec:?} is not lexicon, abstain or constant:<word>"
        )))
    }
}

enum TranslatorSpec {
    Dictionary,
    Identity,
    #[allow(dead_code)]
    Http(String),
}

fn parse_translator_spec(spec: &str) -> Result<TranslatorSpec, CliError> {
    if spec == "dictionary" {
        Ok(TranslatorSpec::Dictionary)
    } else if spec == "identity" {
        Ok(TranslatorSpec::Identity)
    } else if let Some(endpoint) = spec.strip_prefix("http:") {
        if cfg!(feature = "http") {
            Ok(TranslatorSpec::Http(endpoint.to_string()))
        } else {
            Err(CliError::config(
                "providers.translator http:<endpoint> needs a build with the http feature",
            ))
        }
    } else {
        Err(CliError::config(format!(
            "providers.translator {spec:?} is not dictionary, identity or http:<endpoint>"
        )))
    }
}

/// "subprocess:<command...>" or a named built-in.
fn parse_worker_spec(key: &str, spec: &str, builtin: &str) -> Result<Option<Vec<String>>, CliError> {
    if spec == builtin {
        return Ok(None);
    }
    if let Some(command) = spec.strip_prefix("subprocess:") {
        let parts: Vec<String> = command.split_whitespace().map(str::to_string).collect();
        if parts.is_empty() {
            return Err(CliError::config(format!("{key} subprocess needs a command")));
        }
        return Ok(Some(parts));
    }
    Err(CliError::config(format!(
        "{key} {spec:?} is not {builtin:?} or subprocess:<command...>"
    )))
}

pub fn build_fill(config: &RunConfig) -> Result<Box<dyn ContextualFillModel + Sync>, CliError> {
    Ok(match parse_fill_spec(&config.providers.fill)? {
        FillSpec::Lexicon => Box::new(LexiconFill::english()),
        FillSpec::Constant(word) => Box::new(ConstantFill(word)),
        FillSpec::Abstain => Box::new(AbstainFill),
    })
}

pub fn build_translator(
    config: &RunConfig,
) -> Result<Box<dyn TranslationProvider + Sync>, CliError> {
    match parse_translator_spec(&config.providers.translator)? {
        TranslatorSpec::Dictionary => Ok(Box::new(DictionaryTranslator::builtin())),
        TranslatorSpec::Identity => Ok(Box::new(IdentityTranslator)),
        #[cfg(feature = "http")]
        TranslatorSpec::Http(endpoint) => Ok(Box::new(
            taxacc_core::augment::HttpTranslator::from_env(endpoint)
                .map_err(CliError::from)?,
        )),
        #[cfg(not(feature = "http"))]
        TranslatorSpec::Http(_) => unreachable!("rejected at parse time"),
    }
}

pub fn build_backend(config: &RunConfig) -> Result<Box<dyn ClassifierBackend>, CliError> {
    match parse_worker_spec("providers.backend", &config.providers.backend, "hashed-linear")? {
        None => {
            let dim = config.hyper.backend_dim.unwrap_or(4096);
            let lr_scale = config.hyper.backend_lr_scale.unwrap_or(10_000.0);
            if dim == 0 || !(lr_scale > 0.0) {
                return Err(CliError::config(
                    "hyper.backend_dim and hyper.backend_lr_scale must be positive",
                ));
            }
            let registry = BackendRegistry::with_builtins(dim, lr_scale);
            Ok(registry.create("hashed-linear")?)
        }
        Some(parts) => {
            let backend = SubprocessBackend::spawn(&parts[0], &parts[1..])
                .map_err(|e| worker_failed(&parts[0], e))?;
            Ok(Box::new(backend))
        }
    }
}

fn worker_failed(command: &str, error: impl std::fmt::Display) -> CliError {
    CliError::Provider(format!("cannot start worker {command}: {error}"))
}

pub fn build_encoder(config: &RunConfig) -> Result<Box<dyn SentenceEncoder>, CliError> {
    match parse_worker_spec("providers.encoder", &config.providers.encoder, "hashing")? {
        None => Ok(Box::new(HashingEncoder::new(
            config.baseline.encoder_dim,
            config.baseline.encoder_ngram,
        ))),
        Some(parts) => {
            let encoder =
                SubprocessEncoder::spawn(&parts[0], &parts[1..], config.baseline.encoder_dim)
                    .map_err(|e| worker_failed(&parts[0], e))?;
            Ok(Box::new(encoder))
        }
    }
}

/// Rebuild the encoder a saved regressor was trained with. The stored
/// dimensions win over whatever the current config says.
pub fn build_encoder_from_snapshot(
    spec: &str,
    dim: usize,
    ngram_max: usize,
) -> Result<Box<dyn SentenceEncoder>, CliError> {
    match parse_worker_spec("providers.encoder", spec, "hashing")? {
        None => Ok(Box::new(HashingEncoder::new(dim, ngram_max))),
        Some(parts) => {
            let encoder = SubprocessEncoder::spawn(&parts[0], &parts[1..], dim)
                .map_err(|e| worker_failed(&parts[0], e))?;
            Ok(Box::new(encoder))
        }
    }
}

pub fn plan_overrides(config: &RunConfig) -> taxacc_core::pipeline::PlanOverrides {
    taxacc_core::pipeline::PlanOverrides {
        stage1_lr: config.hyper.stage1_lr,
        stage2_lr: config.hyper.stage2_lr,
        epochs: config.hyper.epochs,
        batch_size: config.hyper.batch_size,
        include_original_in_stage1: config.hyper.include_original_in_stage1,
    }
}
