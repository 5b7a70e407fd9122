//! Classical baselines: TF-IDF features with a linear SVM for the binary
//! task, and sentence-embedding regressors for the graded task.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, TaskMode};

mod encoder;
pub mod regress;
mod svm;
mod tfidf;

pub use encoder::{HashingEncoder, SentenceEncoder, SubprocessEncoder};
pub use regress::{
    epsilon_insensitive_loss, predict_scores, train_regressor, RegressorKind, RegressorModel,
    RegressorOptions, SvrModel,
};
pub use svm::{train_svm_classifier, LinearSvm};
pub use tfidf::{fit_tfidf, TfidfOptions, TfidfVectorizer};

/// Sparse vector as (column, value) pairs sorted by column.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub rows: Vec<SparseRow>,
    pub cols: usize,
}

impl SparseMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols)
    }
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("cannot fit on an empty corpus")]
    EmptyCorpus,
    #[error("training data contains a single class; need both labels")]
    SingleClass,
    #[error("shape mismatch: {message}")]
    Shape { message: String },
    #[error("bad parameter: {message}")]
    Parameter { message: String },
    #[error("encoder failure: {message}")]
    Encoder { message: String },
    #[error("unknown regressor {name:?}; expected one of {valid}")]
    UnknownRegressor { name: String, valid: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The organizers' reference system: TF-IDF features into a linear SVM.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfSvmModel {
    format: String,
    vectorizer: TfidfVectorizer,
    svm: LinearSvm,
}

const TFIDF_SVM_FORMAT: &str = "tfidf-svm/1";

impl TfidfSvmModel {
    pub fn train(corpus: &Corpus, options: &TfidfOptions, c: f64) -> Result<TfidfSvmModel, BaselineError> {
        let labels = match corpus.mode() {
            Some(TaskMode::Binary) => corpus.labels().unwrap(),
            _ => {
                return Err(BaselineError::Parameter {
                    message: "tf-idf + svm baseline needs binary labels".into(),
                })
            }
        };
        let vectorizer = fit_tfidf(corpus, options)?;
        let texts: Vec<String> = corpus.examples.iter().map(|e| e.text.clone()).collect();
        let features = vectorizer.transform(&texts);
        let svm = train_svm_classifier(&features, &labels, c)?;
        Ok(TfidfSvmModel {
            format: TFIDF_SVM_FORMAT.into(),
            vectorizer,
            svm,
        })
    }

    pub fn predict(&self, texts: &[String]) -> Vec<u8> {
        self.svm.predict(&self.vectorizer.transform(texts))
    }

    pub fn save(&self, path: &Path) -> Result<(), BaselineError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TfidfSvmModel, BaselineError> {
        let mut model: TfidfSvmModel = serde_json::from_str(&fs::read_to_string(path)?)?;
        if model.format != TFIDF_SVM_FORMAT {
            return Err(BaselineError::Parameter {
                message: format!("unsupported model format {:?}", model.format),
            });
        }
        model.vectorizer.reindex();
        Ok(model)
    }
}
