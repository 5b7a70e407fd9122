//! Ordinary least squares with an intercept, solved by singular value
//! decomposition so rank-deficient designs still yield the least-norm fit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baseline::BaselineError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsModel {
    coefficients: Vec<f64>,
    intercept: f64,
    /// True when the augmented design matrix was not full column rank and
    /// the minimum-norm solution was taken.
    pub rank_deficient: bool,
}

impl OlsModel {
    pub fn input_dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn predict(&self, embeddings: &[Vec<f64>]) -> Vec<f64> {
        crate::par::map(embeddings, |row| {
            row.iter()
                .zip(&self.coefficients)
                .map(|(x, c)| x * c)
                .sum::<f64>()
                + self.intercept
        })
    }
}

pub fn fit(embeddings: &[Vec<f64>], scores: &[f64]) -> Result<OlsModel, BaselineError> {
    let n = embeddings.len();
    let dim = embeddings[0].len();

    // design matrix with a trailing all-ones intercept column
    let design = DMatrix::from_fn(n, dim + 1, |r, c| {
        if c == dim {
            1.0
        } else {
            embeddings[r][c]
        }
    });
    let targets = DVector::from_column_slice(scores);

    let svd = design.clone().svd(true, true);
    let max_singular = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tolerance = max_singular * (n.max(dim + 1) as f64) * f64::EPSILON;
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tolerance)
        .count();
    let solution = svd
        .solve(&targets, tolerance)
        .map_err(|e| BaselineError::Parameter {
            message: format!("least-squares solve failed: {e}"),
        })?;

    let coefficients = solution.as_slice()[..dim].to_vec();
    Ok(OlsModel {
        coefficients,
        intercept: solution[dim],
        rank_deficient: rank < dim + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovers_coefficients() {
        let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let model = fit(&x, &y).unwrap();
        assert!((model.coefficients()[0] - 2.0).abs() < 1e-10);
        assert!((model.intercept() - 1.0).abs() < 1e-10);
        assert!(!model.rank_deficient);

        let residual: f64 = model
            .predict(&x)
            .iter()
            .zip(&y)
            .map(|(p, t)| (p - t).powi(2))
            .sum();
        assert!(residual < 1e-20, "residual {residual}");
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        // noisy but well-conditioned two-feature fixture
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64).sin() + i as f64 * 0.3, (i as f64 * 0.7).cos()])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, r)| 1.5 * r[0] - 0.8 * r[1] + 2.0 + if i % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        let model = fit(&x, &y).unwrap();
        let fitted = model.predict(&x);
        let residuals: Vec<f64> = fitted.iter().zip(&y).map(|(p, t)| t - p).collect();

        for feature in 0..2 {
            let dot: f64 = x
                .iter()
                .zip(&residuals)
                .map(|(row, r)| row[feature] * r)
                .sum();
            assert!(dot.abs() < 1e-8, "feature {feature}: {dot}");
        }
        let intercept_dot: f64 = residuals.iter().sum();
        assert!(intercept_dot.abs() < 1e-8);
    }

    #[test]
    fn singular_design_is_flagged_not_fatal() {
        // second column is twice the first: rank deficient
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 3.0 * i as f64 + 1.0).collect();
        let model = fit(&x, &y).unwrap();
        assert!(model.rank_deficient);
        // fit is still exact on the training data
        for (p, t) in model.predict(&x).iter().zip(&y) {
            assert!((p - t).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_target_gives_flat_model() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y = vec![4.0; 6];
        let model = fit(&x, &y).unwrap();
        for p in model.predict(&x) {
            assert!((p - 4.0).abs() < 1e-8);
        }
    }
}
