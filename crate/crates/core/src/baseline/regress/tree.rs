//! CART-style regression tree: greedy squared-error splits grown to purity.

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<Node>,
    dim: usize,
}

impl TreeModel {
    pub fn input_dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, embeddings: &[Vec<f64>]) -> Vec<f64> {
        crate::par::map(embeddings, |row| {
            let mut at = 0;
            loop {
                match self.nodes[at] {
                    Node::Leaf { value } => return value,
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        at = if row[feature] <= threshold { left } else { right };
                    }
                }
            }
        })
    }
}

pub fn fit(embeddings: &[Vec<f64>], scores: &[f64]) -> Result<TreeModel, BaselineError> {
    let dim = embeddings[0].len();
    let mut nodes = Vec::new();
    let indices: Vec<usize> = (0..embeddings.len()).collect();
    grow(embeddings, scores, indices, &mut nodes);
    Ok(TreeModel { nodes, dim })
}

fn grow(x: &[Vec<f64>], y: &[f64], indices: Vec<usize>, nodes: &mut Vec<Node>) -> usize {
    let mean = indices.iter().map(|&i| y[i]).sum::<f64>() / indices.len() as f64;
    let pure = indices.iter().all(|&i| (y[i] - mean).abs() < 1e-12);
    let split = if pure || indices.len() < 2 {
        None
    } else {
        best_split(x, y, &indices)
    };

    match split {
        None => {
            nodes.push(Node::Leaf { value: mean });
            nodes.len() - 1
        }
        Some((feature, threshold)) => {
            let (left_set, right_set): (Vec<usize>, Vec<usize>) = indices
                .into_iter()
                .partition(|&i| x[i][feature] <= threshold);
            let at = nodes.len();
            nodes.push(Node::Leaf { value: mean }); // placeholder until children exist
            let left = grow(x, y, left_set, nodes);
            let right = grow(x, y, right_set, nodes);
            nodes[at] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            at
        }
    }
}

/// Scan every (feature, boundary between distinct values) for the lowest
/// total squared error, using prefix sums over the sorted targets.
fn best_split(x: &[Vec<f64>], y: &[f64], indices: &[usize]) -> Option<(usize, f64)> {
    let dim = x[0].len();
    let n = indices.len();
    let mut best: Option<(f64, usize, f64)> = None;

    for feature in 0..dim {
        let mut sorted: Vec<usize> = indices.to_vec();
        sorted.sort_by(|&a, &b| {
            x[a][feature]
                .partial_cmp(&x[b][feature])
                .unwrap()
                .then(a.cmp(&b))
        });

        let mut prefix_sum = vec![0.0; n + 1];
        let mut prefix_sq = vec![0.0; n + 1];
        for (pos, &i) in sorted.iter().enumerate() {
            prefix_sum[pos + 1] = prefix_sum[pos] + y[i];
            prefix_sq[pos + 1] = prefix_sq[pos] + y[i] * y[i];
        }
        let sse = |from: usize, to: usize| {
            let count = (to - from) as f64;
            let sum = prefix_sum[to] - prefix_sum[from];
            let sq = prefix_sq[to] - prefix_sq[from];
            sq - sum * sum / count
        };

        for cut in 1..n {
            let lo = x[sorted[cut - 1]][feature];
            let hi = x[sorted[cut]][feature];
            if lo == hi {
                continue;
            }
            let total = sse(0, cut) + sse(cut, n);
            let threshold = lo + (hi - lo) / 2.0;
            let better = match best {
                None => true,
                Some((cost, _, _)) => total + 1e-15 < cost,
            };
            if better {
                best = Some((total, feature, threshold));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_inputs_are_memorized() {
        let x = crate::baseline::regress::grid_embeddings(15, 3);
        let y: Vec<f64> = (0..15).map(|i| ((i * 13) % 7) as f64 + 1.0).collect();
        let model = fit(&x, &y).unwrap();
        for (p, t) in model.predict(&x).iter().zip(&y) {
            assert_eq!(p, t);
        }
    }

    #[test]
    fn split_reduces_to_group_means() {
        // one feature, two clusters with different targets
        let x = vec![vec![0.0], vec![0.1], vec![1.0], vec![1.1]];
        let y = vec![2.0, 2.0, 6.0, 6.0];
        let model = fit(&x, &y).unwrap();
        assert_eq!(model.predict(&[vec![0.05]]), vec![2.0]);
        assert_eq!(model.predict(&[vec![1.05]]), vec![6.0]);
        assert_eq!(model.depth(), 2, "a single split suffices");
    }

    #[test]
    fn duplicate_rows_with_conflicting_targets_average() {
        let x = vec![vec![1.0], vec![1.0], vec![2.0]];
        let y = vec![3.0, 5.0, 7.0];
        let model = fit(&x, &y).unwrap();
        let out = model.predict(&[vec![1.0]]);
        assert_eq!(out[0], 4.0, "unsplittable duplicates take the mean");
        assert_eq!(model.predict(&[vec![2.0]]), vec![7.0]);
    }

    #[test]
    fn constant_targets_make_a_single_leaf() {
        let x = crate::baseline::regress::grid_embeddings(6, 2);
        let y = vec![4.0; 6];
        let model = fit(&x, &y).unwrap();
        assert_eq!(model.depth(), 1);
        assert_eq!(model.predict(&x), y);
    }

    #[test]
    fn thresholds_are_midpoints() {
        let x = vec![vec![0.0], vec![2.0]];
        let y = vec![1.0, 3.0];
        let model = fit(&x, &y).unwrap();
        match model.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 1.0),
            Node::Leaf { .. } => panic!("expected a split at the root"),
        }
    }
}
