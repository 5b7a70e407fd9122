//! Training strategies as declarative multi-stage plans.
//!
//! Each strategy names which dataset handles feed which fine-tuning stage
//! and at what learning rate. Plans are built once, validated against the
//! available data, then executed stage by stage against any
//! [`ClassifierBackend`]; the executor shuffles each stage's concatenated
//! data with the run seed and records a complete trace.

mod backend;

pub use backend::{
    ClassifierBackend, HashedLinearBackend, RecordingBackend, SubprocessBackend,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Annotation, Corpus, CorpusError, Example, Language, NounPair};
use crate::hashing::derive_seed;

/// Dataset handle names used by the built-in strategies.
pub mod handles {
    pub const ORIGINAL: &str = "original";
    pub const NLPAUG: &str = "nlpaug";
    pub const TRANSLATED: &str = "translated";
    pub const COMMONSENSE: &str = "commonsense";
}

/// The built-in training strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Two stages: contextual-edit data first at the lower rate, then
    /// translated plus original data at the higher rate.
    UuTax,
    /// Stage 1 contextual-edit data, stage 2 original only.
    Ablation1,
    /// Stage 1 translated data, stage 2 original only.
    Ablation2,
    /// One stage on the original data.
    SingleStage1,
    /// One stage on everything at once.
    SingleStage2,
    /// Stage 1 on relabeled commonsense-validity data, stage 2 on
    /// contextual-edit plus original data.
    MultiTask,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::UuTax,
        Strategy::Ablation1,
        Strategy::Ablation2,
        Strategy::SingleStage1,
        Strategy::SingleStage2,
        Strategy::MultiTask,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::UuTax => "uu_tax",
            Strategy::Ablation1 => "ablation1",
            Strategy::Ablation2 => "ablation2",
            Strategy::SingleStage1 => "single_stage_1",
            Strategy::SingleStage2 => "single_stage_2",
            Strategy::MultiTask => "multi_task",
        }
    }

    fn valid_ids() -> String {
        Strategy::ALL
            .iter()
            .map(|s| s.id())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Strategy {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.id() == s)
            .ok_or_else(|| PipelineError::UnknownStrategy {
                name: s.to_string(),
                valid: Strategy::valid_ids(),
            })
    }
}

/// One fine-tuning stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    /// Dataset handles concatenated (in this order) before the seeded
    /// shuffle.
    pub datasets: Vec<String>,
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: u32,
    pub optimizer: String,
    pub lr_schedule: String,
}

/// An ordered sequence of stages for one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPlan {
    pub strategy: String,
    pub language: Language,
    pub stages: Vec<StageConfig>,
}

/// Optional hyper-parameter overrides for [`build_training_plan`].
#[derive(Debug, Clone, Default)]
pub struct PlanOverrides {
    pub stage1_lr: Option<f64>,
    pub stage2_lr: Option<f64>,
    pub epochs: Option<u32>,
    pub batch_size: Option<u32>,
    /// Also feed the original data through stage 1 of the two-stage
    /// strategies (off by default).
    pub include_original_in_stage1: bool,
}

const LOW_LR: f64 = 3e-5;
const HIGH_LR: f64 = 4e-5;
const DEFAULT_EPOCHS: u32 = 4;
const DEFAULT_BATCH: u32 = 8;
const OPTIMIZER: &str = "adamw";
const LR_SCHEDULE: &str = "linear_decay";

/// Build the stage layout for a strategy, checking that every dataset
/// handle it needs is actually available.
pub fn build_training_plan(
    strategy: Strategy,
    language: Language,
    available: &[&str],
    overrides: &PlanOverrides,
) -> Result<TrainingPlan, PipelineError> {
    use handles::{COMMONSENSE, NLPAUG, ORIGINAL, TRANSLATED};

    let stage1_lr = overrides.stage1_lr.unwrap_or(LOW_LR);
    let stage2_lr = overrides.stage2_lr.unwrap_or(HIGH_LR);
    let single_lr = overrides.stage2_lr.unwrap_or(HIGH_LR);
    let epochs = overrides.epochs.unwrap_or(DEFAULT_EPOCHS);
    let batch_size = overrides.batch_size.unwrap_or(DEFAULT_BATCH);

    for (name, lr) in [("stage 1", stage1_lr), ("stage 2", stage2_lr)] {
        if !(lr > 0.0) {
            return Err(PipelineError::InvalidHyper {
                message: format!("{name} learning rate must be positive, got {lr}"),
            });
        }
    }
    if epochs < 1 {
        return Err(PipelineError::InvalidHyper {
            message: "epochs must be at least 1".to_string(),
        });
    }
    if batch_size < 1 {
        return Err(PipelineError::InvalidHyper {
            message: "batch size must be at least 1".to_string(),
        });
    }

    let two_stage = |first: Vec<&'static str>, second: Vec<&'static str>| {
        let mut first = first;
        if overrides.include_original_in_stage1 && !first.contains(&ORIGINAL) {
            first.push(ORIGINAL);
        }
        vec![(first, stage1_lr), (second, stage2_lr)]
    };
    let layout: Vec<(Vec<&str>, f64)> = match strategy {
        Strategy::UuTax => two_stage(vec![NLPAUG], vec![TRANSLATED, ORIGINAL]),
        Strategy::Ablation1 => two_stage(vec![NLPAUG], vec![ORIGINAL]),
        Strategy::Ablation2 => two_stage(vec![TRANSLATED], vec![ORIGINAL]),
        Strategy::SingleStage1 => vec![(vec![ORIGINAL], single_lr)],
        Strategy::SingleStage2 => {
            vec![(vec![NLPAUG, TRANSLATED, ORIGINAL], single_lr)]
        }
        Strategy::MultiTask => two_stage(vec![COMMONSENSE], vec![NLPAUG, ORIGINAL]),
    };

    for (datasets, _) in &layout {
        for handle in datasets {
            if !available.contains(handle) {
                return Err(PipelineError::MissingDataset {
                    handle: handle.to_string(),
                    strategy: strategy.id().to_string(),
                });
            }
        }
    }

    let stages = layout
        .into_iter()
        .map(|(datasets, learning_rate)| StageConfig {
            datasets: datasets.into_iter().map(String::from).collect(),
            learning_rate,
            epochs,
            batch_size,
            optimizer: OPTIMIZER.to_string(),
            lr_schedule: LR_SCHEDULE.to_string(),
        })
        .collect();

    Ok(TrainingPlan {
        strategy: strategy.id().to_string(),
        language,
        stages,
    })
}

/// What one executed stage did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    /// 1-based stage number.
    pub stage: usize,
    /// (handle, corpus fingerprint) per dataset, in plan order.
    pub datasets: Vec<(String, String)>,
    pub learning_rate: f64,
    pub epochs: u32,
    pub batch_size: u32,
    /// Total examples fed to the backend this stage.
    pub examples: usize,
    /// Backend state digest after the stage finished.
    pub backend_fingerprint: String,
}

/// Full record of an executed plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub strategy: String,
    pub language: Language,
    pub seed: u64,
    pub stages: Vec<StageTrace>,
}

/// Run every stage of the plan, in order, against the backend.
///
/// Each stage concatenates its datasets in plan order, shuffles the result
/// with a seed derived from the run seed and stage number, and hands it to
/// the backend once. A backend error aborts the run with the completed
/// stages' trace attached; nothing pretends to have finished.
pub fn execute_plan(
    plan: &TrainingPlan,
    backend: &mut dyn ClassifierBackend,
    data: &BTreeMap<String, Corpus>,
    seed: u64,
) -> Result<ExecutionTrace, PipelineError> {
    // fail before touching the backend if anything is missing or mismatched
    for stage in &plan.stages {
        for handle in &stage.datasets {
            let corpus = data.get(handle).ok_or_else(|| PipelineError::MissingDataset {
                handle: handle.clone(),
                strategy: plan.strategy.clone(),
            })?;
            if corpus.language != plan.language {
                return Err(PipelineError::InvalidHyper {
                    message: format!(
                        "dataset `{handle}` is {}, plan trains {}",
                        corpus.language, plan.language
                    ),
                });
            }
        }
    }

    let mut stages = Vec::with_capacity(plan.stages.len());
    for (i, stage) in plan.stages.iter().enumerate() {
        let number = i + 1;
        let mut merged: Vec<Example> = Vec::new();
        let mut dataset_meta = Vec::new();
        for handle in &stage.datasets {
            let corpus = &data[handle];
            dataset_meta.push((handle.clone(), corpus.fingerprint()));
            merged.extend(corpus.examples.iter().cloned());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[number as u64]));
        merged.shuffle(&mut rng);
        let examples = merged.len();
        let stage_corpus = Corpus::new(plan.language, merged)?;

        backend
            .fine_tune(&stage_corpus, stage)
            .map_err(|e| PipelineError::StageFailed {
                stage: number,
                reason: e.to_string(),
                completed: stages.clone(),
            })?;

        stages.push(StageTrace {
            stage: number,
            datasets: dataset_meta,
            learning_rate: stage.learning_rate,
            epochs: stage.epochs,
            batch_size: stage.batch_size,
            examples,
            backend_fingerprint: backend.fingerprint(),
        });
    }

    Ok(ExecutionTrace {
        strategy: plan.strategy.clone(),
        language: plan.language,
        seed,
        stages,
    })
}

/// A sentence enriched with its noun pair for backends that accept
/// segment-structured input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedPrompt {
    pub text: String,
}

impl fmt::Display for EnrichedPrompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Assemble `sentence SEP noun1 SEP noun2`. Framing tokens (like a leading
/// CLS) are the backend's job, not ours. The noun pair is re-validated
/// against the sentence.
pub fn build_enriched_prompt(
    example: &Example,
    nouns: &NounPair,
    sep: &str,
) -> Result<EnrichedPrompt, CorpusError> {
    let check = NounPair::from_spans(&example.text, nouns.span1.clone(), nouns.span2.clone())?;
    if check.noun1 != nouns.noun1 || check.noun2 != nouns.noun2 {
        return Err(CorpusError::InvalidSpan {
            span: nouns.span1.clone(),
        });
    }
    Ok(EnrichedPrompt {
        text: format!("{} {sep} {} {sep} {}", example.text, nouns.noun1, nouns.noun2),
    })
}

/// Turn (sentence, validity) rows into a binary corpus: valid maps to 1.
pub fn relabel_commonsense(rows: &[(String, bool)], language: Language) -> Corpus {
    let examples = rows
        .iter()
        .enumerate()
        .map(|(i, (text, valid))| Example {
            id: format!("cs{i}"),
            text: text.clone(),
            language,
            annotation: Annotation::Label(u8::from(*valid)),
        })
        .collect();
    Corpus {
        language,
        examples,
    }
}

/// Parse a tab-separated commonsense-validity file (`sentence`, `valid`
/// columns; extra columns ignored) and relabel it.
pub fn parse_commonsense_file(path: &Path, language: Language) -> Result<Corpus, PipelineError> {
    let raw = std::fs::read_to_string(path)?;
    let mut lines = raw.lines();
    let header: Vec<&str> = lines
        .next()
        .unwrap_or_default()
        .trim_end_matches('\r')
        .split('\t')
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| PipelineError::Schema {
                message: format!("commonsense file is missing the `{name}` column"),
            })
    };
    let sentence_col = col("sentence")?;
    let valid_col = col("valid")?;

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let width = sentence_col.max(valid_col) + 1;
        if fields.len() < width {
            return Err(PipelineError::Schema {
                message: format!("commonsense row {}: expected {width} columns", i + 2),
            });
        }
        let valid = match fields[valid_col].trim() {
            "1" | "true" | "True" => true,
            "0" | "false" | "False" => false,
            other => {
                return Err(PipelineError::Schema {
                    message: format!("commonsense row {}: bad validity `{other}`", i + 2),
                })
            }
        };
        rows.push((fields[sentence_col].trim().to_string(), valid));
    }
    Ok(relabel_commonsense(&rows, language))
}

/// Predict one binary label per corpus example, order-aligned.
pub fn predict_labels(
    backend: &dyn ClassifierBackend,
    corpus: &Corpus,
) -> Result<Vec<u8>, PipelineError> {
    let texts: Vec<String> = corpus.iter().map(|e| e.text.clone()).collect();
    backend.predict(&texts)
}

/// Named constructors for classifier backends.
pub struct BackendRegistry {
    factories: BTreeMap<String, Box<dyn Fn() -> Result<Box<dyn ClassifierBackend>, PipelineError> + Send + Sync>>,
}

impl BackendRegistry {
    pub fn new() -> BackendRegistry {
        BackendRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with the reference backend under `hashed-linear`.
    pub fn with_builtins(dim: usize, lr_scale: f64) -> BackendRegistry {
        let mut registry = BackendRegistry::new();
        registry.register("hashed-linear", move || {
            Ok(Box::new(HashedLinearBackend::new(dim, lr_scale)))
        });
        registry
    }

    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn() -> Result<Box<dyn ClassifierBackend>, PipelineError> + Send + Sync + 'static,
    ) {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn ClassifierBackend>, PipelineError> {
        match self.factories.get(name) {
            Some(factory) => factory(),
            None => Err(PipelineError::UnknownBackend {
                name: name.to_string(),
                valid: self.names().join(", "),
            }),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        BackendRegistry::new()
    }
}

/// Errors from plan construction and execution.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("unknown strategy `{name}` (valid: {valid})")]
    UnknownStrategy { name: String, valid: String },
    #[error("strategy `{strategy}` needs the `{handle}` dataset, which is unavailable")]
    MissingDataset { handle: String, strategy: String },
    #[error("invalid hyper-parameter: {message}")]
    InvalidHyper { message: String },
    #[error("stage {stage} failed: {reason}")]
    StageFailed {
        stage: usize,
        reason: String,
        completed: Vec<StageTrace>,
    },
    #[error("backend has not been trained")]
    NotTrained,
    #[error("backend error: {message}")]
    Backend { message: String },
    #[error("unknown backend `{name}` (valid: {valid})")]
    UnknownBackend { name: String, valid: String },
    #[error("schema error: {message}")]
    Schema { message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
