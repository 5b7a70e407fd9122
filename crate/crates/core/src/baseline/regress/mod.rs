//! Regressors for the Likert-score task: ordinary least squares, k-nearest
//! neighbors, a CART-style decision tree, and epsilon-insensitive support
//! vector regression.
//!
//! All four consume dense row-major embeddings and real-valued targets.
//! Pinned parameters: knn k=5 with uniform weights; tree squared-error
//! splits to purity; svr RBF kernel with C=1.0 and epsilon=0.2.

mod knn;
mod ols;
mod svr;
mod tree;

pub use knn::KnnModel;
pub use ols::OlsModel;
pub use svr::{epsilon_insensitive_loss, SvrModel};
pub use tree::TreeModel;

use serde::{Deserialize, Serialize};

use super::BaselineError;

/// Which regressor to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Ols,
    Knn,
    Tree,
    Svr,
}

impl RegressorKind {
    pub const ALL: [RegressorKind; 4] = [
        RegressorKind::Ols,
        RegressorKind::Knn,
        RegressorKind::Tree,
        RegressorKind::Svr,
    ];

    pub fn id(self) -> &'static str {
        match self {
            RegressorKind::Ols => "ols",
            RegressorKind::Knn => "knn",
            RegressorKind::Tree => "tree",
            RegressorKind::Svr => "svr",
        }
    }
}

impl std::fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for RegressorKind {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegressorKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| BaselineError::UnknownRegressor {
                name: s.to_string(),
                valid: RegressorKind::ALL
                    .iter()
                    .map(|k| k.id())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Kind-specific hyper-parameters with the pinned defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressorOptions {
    pub knn_k: usize,
    pub svr_epsilon: f64,
    pub svr_c: f64,
}

impl Default for RegressorOptions {
    fn default() -> RegressorOptions {
        RegressorOptions {
            knn_k: 5,
            svr_epsilon: 0.2,
            svr_c: 1.0,
        }
    }
}

/// A fitted regressor of any kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegressorModel {
    Ols(OlsModel),
    Knn(KnnModel),
    Tree(TreeModel),
    Svr(SvrModel),
}

impl RegressorModel {
    pub fn kind(&self) -> RegressorKind {
        match self {
            RegressorModel::Ols(_) => RegressorKind::Ols,
            RegressorModel::Knn(_) => RegressorKind::Knn,
            RegressorModel::Tree(_) => RegressorKind::Tree,
            RegressorModel::Svr(_) => RegressorKind::Svr,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            RegressorModel::Ols(m) => m.input_dim(),
            RegressorModel::Knn(m) => m.input_dim(),
            RegressorModel::Tree(m) => m.input_dim(),
            RegressorModel::Svr(m) => m.input_dim(),
        }
    }
}

fn check_training_shape(embeddings: &[Vec<f64>], scores: &[f64]) -> Result<usize, BaselineError> {
    if embeddings.len() != scores.len() {
        return Err(BaselineError::Shape {
            message: format!("{} rows vs {} scores", embeddings.len(), scores.len()),
        });
    }
    if embeddings.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    let dim = embeddings[0].len();
    if dim == 0 {
        return Err(BaselineError::Shape {
            message: "zero-dimensional embeddings".to_string(),
        });
    }
    if let Some(row) = embeddings.iter().find(|r| r.len() != dim) {
        return Err(BaselineError::Shape {
            message: format!("ragged embeddings: {} vs {}", row.len(), dim),
        });
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(BaselineError::Parameter {
            message: format!("non-finite target {bad}"),
        });
    }
    Ok(dim)
}

/// Fit a regressor on embeddings and scores.
pub fn train_regressor(
    embeddings: &[Vec<f64>],
    scores: &[f64],
    kind: RegressorKind,
    options: &RegressorOptions,
) -> Result<RegressorModel, BaselineError> {
    check_training_shape(embeddings, scores)?;
    match kind {
        RegressorKind::Ols => ols::fit(embeddings, scores).map(RegressorModel::Ols),
        RegressorKind::Knn => knn::fit(embeddings, scores, options.knn_k).map(RegressorModel::Knn),
        RegressorKind::Tree => tree::fit(embeddings, scores).map(RegressorModel::Tree),
        RegressorKind::Svr => {
            svr::fit(embeddings, scores, options.svr_c, options.svr_epsilon).map(RegressorModel::Svr)
        }
    }
}

/// Predict scores for new embeddings; `clamp` squeezes outputs into the
/// 1–7 scale (rank correlation does not care, so it is off by default).
pub fn predict_scores(
    model: &RegressorModel,
    embeddings: &[Vec<f64>],
    clamp: bool,
) -> Result<Vec<f64>, BaselineError> {
    let dim = model.input_dim();
    if let Some(row) = embeddings.iter().find(|r| r.len() != dim) {
        return Err(BaselineError::Shape {
            message: format!("model expects {dim}-dimensional rows, got {}", row.len()),
        });
    }
    let raw = match model {
        RegressorModel::Ols(m) => m.predict(embeddings),
        RegressorModel::Knn(m) => m.predict(embeddings),
        RegressorModel::Tree(m) => m.predict(embeddings),
        RegressorModel::Svr(m) => m.predict(embeddings),
    };
    debug_assert!(raw.iter().all(|p| p.is_finite()));
    Ok(if clamp {
        raw.into_iter().map(|p| p.clamp(1.0, 7.0)).collect()
    } else {
        raw
    })
}

#[cfg(test)]
pub(crate) fn grid_embeddings(n: usize, dim: usize) -> Vec<Vec<f64>> {
    // deterministic spread-out points for fixtures
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|j| ((i * 31 + j * 17) % 23) as f64 / 23.0 + i as f64 * 0.01)
                .collect()
        })
        .collect()
}
