//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved by sequential minimal optimization over paired
//! variables: each training point contributes one variable boxed in [0, C]
//! and one in [-C, 0]; their sum is the point's kernel coefficient. The
//! most-violating pair is updated analytically until the duality gap falls
//! under tolerance, which makes the solver exact on easy fixtures (targets
//! inside one epsilon band terminate immediately with a constant model).

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvrModel {
    train_x: Vec<Vec<f64>>,
    /// Kernel expansion coefficients; zero for non-support rows.
    beta: Vec<f64>,
    bias: f64,
    gamma: f64,
    pub epsilon: f64,
}

impl SvrModel {
    pub fn input_dim(&self) -> usize {
        self.train_x[0].len()
    }

    pub fn support_count(&self) -> usize {
        self.beta.iter().filter(|b| b.abs() > 1e-12).count()
    }

    pub fn predict(&self, embeddings: &[Vec<f64>]) -> Vec<f64> {
        crate::par::map(embeddings, |query| {
            self.train_x
                .iter()
                .zip(&self.beta)
                .filter(|(_, &b)| b != 0.0)
                .map(|(row, &b)| b * rbf(row, query, self.gamma))
                .sum::<f64>()
                + self.bias
        })
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let squared: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * squared).exp()
}

/// Sum of per-point losses: `max(0, |error| - epsilon)`.
pub fn epsilon_insensitive_loss(truth: &[f64], predictions: &[f64], epsilon: f64) -> f64 {
    truth
        .iter()
        .zip(predictions)
        .map(|(t, p)| ((t - p).abs() - epsilon).max(0.0))
        .sum()
}

/// Kernel width following the "scale" convention: `1 / (dim * var(X))`,
/// falling back to 1 when the features have no variance.
fn scale_gamma(embeddings: &[Vec<f64>]) -> f64 {
    let dim = embeddings[0].len();
    let count = (embeddings.len() * dim) as f64;
    let mean: f64 = embeddings.iter().flatten().sum::<f64>() / count;
    let var: f64 = embeddings
        .iter()
        .flatten()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / count;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0
    }
}

pub fn fit(
    embeddings: &[Vec<f64>],
    scores: &[f64],
    c: f64,
    epsilon: f64,
) -> Result<SvrModel, BaselineError> {
    if epsilon < 0.0 {
        return Err(BaselineError::Parameter {
            message: format!("epsilon must be non-negative, got {epsilon}"),
        });
    }
    if !(c > 0.0) {
        return Err(BaselineError::Parameter {
            message: format!("cost must be positive, got {c}"),
        });
    }

    let n = embeddings.len();
    let gamma = scale_gamma(embeddings);
    let kernel: Vec<Vec<f64>> = embeddings
        .iter()
        .map(|a| embeddings.iter().map(|b| rbf(a, b, gamma)).collect())
        .collect();

    // 2n paired variables: t < n boxed in [0, C], t >= n in [-C, 0]
    let lower = |t: usize| if t < n { 0.0 } else { -c };
    let upper = |t: usize| if t < n { c } else { 0.0 };
    let linear = |t: usize| {
        if t < n {
            epsilon - scores[t]
        } else {
            -epsilon - scores[t - n]
        }
    };
    let row = |t: usize| t % n;

    let mut u = vec![0.0f64; 2 * n];
    let mut gradient: Vec<f64> = (0..2 * n).map(linear).collect();
    let tolerance = 1e-3;
    let max_updates = 100_000;

    let mut bounds = (0.0, 0.0);
    for _ in 0..max_updates {
        // most-violating pair: lowest gradient that may increase vs
        // highest gradient that may decrease
        let mut up: Option<(f64, usize)> = None;
        let mut down: Option<(f64, usize)> = None;
        for t in 0..2 * n {
            if u[t] < upper(t) && up.map_or(true, |(g, _)| gradient[t] < g) {
                up = Some((gradient[t], t));
            }
            if u[t] > lower(t) && down.map_or(true, |(g, _)| gradient[t] > g) {
                down = Some((gradient[t], t));
            }
        }
        let (Some((g_up, i)), Some((g_down, j))) = (up, down) else {
            break;
        };
        bounds = (g_up, g_down);
        if g_down - g_up <= tolerance {
            break;
        }

        let quad = (kernel[row(i)][row(i)] + kernel[row(j)][row(j)]
            - 2.0 * kernel[row(i)][row(j)])
            .max(1e-12);
        let step = ((g_down - g_up) / quad)
            .min(upper(i) - u[i])
            .min(u[j] - lower(j));
        u[i] += step;
        u[j] -= step;
        for t in 0..2 * n {
            gradient[t] += step * (kernel[row(i)][row(t)] - kernel[row(j)][row(t)]);
        }
    }

    // bias from the stationarity condition: free variables pin it exactly,
    // otherwise take the middle of the feasible interval
    let free: Vec<f64> = (0..2 * n)
        .filter(|&t| u[t] > lower(t) + 1e-12 && u[t] < upper(t) - 1e-12)
        .map(|t| -gradient[t])
        .collect();
    let bias = if free.is_empty() {
        -(bounds.0 + bounds.1) / 2.0
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };

    let beta: Vec<f64> = (0..n).map(|i| u[i] + u[n + i]).collect();
    Ok(SvrModel {
        train_x: embeddings.to_vec(),
        beta,
        bias,
        gamma,
        epsilon,
    })
}
