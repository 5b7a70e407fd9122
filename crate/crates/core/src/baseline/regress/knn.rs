//! K-nearest-neighbor regression with uniform weights.

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    k: usize,
}

impl KnnModel {
    pub fn input_dim(&self) -> usize {
        self.train_x[0].len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Mean target of the `k` nearest training rows by Euclidean distance.
    /// Distance ties break toward the earlier training row, so predictions
    /// are deterministic.
    pub fn predict(&self, embeddings: &[Vec<f64>]) -> Vec<f64> {
        crate::par::map(embeddings, |query| {
            let mut distances: Vec<(f64, usize)> = self
                .train_x
                .iter()
                .enumerate()
                .map(|(i, row)| (squared_distance(query, row), i))
                .collect();
            distances
                .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let total: f64 = distances[..self.k].iter().map(|&(_, i)| self.train_y[i]).sum();
            total / self.k as f64
        })
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn fit(embeddings: &[Vec<f64>], scores: &[f64], k: usize) -> Result<KnnModel, BaselineError> {
    if k == 0 {
        return Err(BaselineError::Parameter {
            message: "k must be at least 1".to_string(),
        });
    }
    if embeddings.len() < k {
        return Err(BaselineError::Parameter {
            message: format!("k={k} exceeds the {} training rows", embeddings.len()),
        });
    }
    Ok(KnnModel {
        train_x: embeddings.to_vec(),
        train_y: scores.to_vec(),
        k,
    })
}
