//! Building blocks for taxonomic-acceptability experiments: task-file corpora
//! with pattern-held-out splits, contextual-edit and translation augmentation,
//! declarative multi-stage fine-tuning plans over pluggable classifier
//! backends, TF-IDF/SVM and sentence-embedding regressor baselines, and the
//! shared-task evaluation metrics (positive-class F1, Spearman's rho).
//!
//! The heavy batch operations (augmentation, document-frequency indexing,
//! batched transforms and predictions) run data-parallel on rayon when the
//! default `parallel` feature is enabled and fall back to sequential loops
//! when it is not. Results are identical either way.

pub mod augment;
pub mod baseline;
pub mod corpus;
pub mod eval;
pub mod pipeline;

mod hashing;
mod par;
mod proc;

pub use corpus::{Corpus, DevValSplit, Example, Language, NounPair, Pattern, TaskMode};
