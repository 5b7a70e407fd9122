//! Linear support vector classification by dual coordinate descent.
//!
//! Hinge loss, L2 regularization, and a bias handled as an extra constant
//! feature. The optimizer sweeps examples in a fixed order, so training is
//! deterministic for a fixed input.

use serde::{Deserialize, Serialize};

use super::{BaselineError, SparseMatrix};

/// A trained maximum-margin linear classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSvm {
    /// Feature weights; the final entry is the bias weight.
    weights: Vec<f64>,
    dim: usize,
}

impl LinearSvm {
    pub fn decision(&self, row: &[(usize, f64)]) -> f64 {
        let mut z = self.weights[self.dim]; // bias feature is constant 1
        for &(col, v) in row {
            if col < self.dim {
                z += self.weights[col] * v;
            }
        }
        z
    }

    pub fn predict(&self, features: &SparseMatrix) -> Vec<u8> {
        crate::par::map(&features.rows, |row| u8::from(self.decision(row) >= 0.0))
    }
}

/// Train with hinge loss at the given cost `c`.
///
/// Needs at least one example of each class; conflicting duplicates are
/// fine (the optimizer converges to a compromise).
pub fn train_svm_classifier(
    features: &SparseMatrix,
    labels: &[u8],
    c: f64,
) -> Result<LinearSvm, BaselineError> {
    if features.rows.len() != labels.len() {
        return Err(BaselineError::Shape {
            message: format!(
                "{} feature rows vs {} labels",
                features.rows.len(),
                labels.len()
            ),
        });
    }
    if labels.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    if !(c > 0.0) {
        return Err(BaselineError::Parameter {
            message: format!("cost must be positive, got {c}"),
        });
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(BaselineError::SingleClass);
    }

    let n = labels.len();
    let dim = features.cols;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l) * 2.0 - 1.0).collect();
    // squared norms include the implicit bias feature
    let q: Vec<f64> = features
        .rows
        .iter()
        .map(|row| row.iter().map(|&(_, v)| v * v).sum::<f64>() + 1.0)
        .collect();

    let mut weights = vec![0.0; dim + 1];
    let mut alpha = vec![0.0; n];
    let tolerance = 1e-6;
    let max_passes = 2000;

    for _ in 0..max_passes {
        let mut max_violation: f64 = 0.0;
        for i in 0..n {
            let row = &features.rows[i];
            let mut z = weights[dim];
            for &(col, v) in row {
                z += weights[col] * v;
            }
            let gradient = y[i] * z - 1.0;
            let projected = if alpha[i] <= 0.0 {
                gradient.min(0.0)
            } else if alpha[i] >= c {
                gradient.max(0.0)
            } else {
                gradient
            };
            max_violation = max_violation.max(projected.abs());
            if projected.abs() > 1e-12 {
                let updated = (alpha[i] - gradient / q[i]).clamp(0.0, c);
                let delta = (updated - alpha[i]) * y[i];
                if delta != 0.0 {
                    for &(col, v) in row {
                        weights[col] += delta * v;
                    }
                    weights[dim] += delta;
                    alpha[i] = updated;
                }
            }
        }
        if max_violation < tolerance {
            break;
        }
    }

    Ok(LinearSvm { weights, dim })
}
