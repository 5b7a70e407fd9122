//! Classifier backends: the trait, the trainable reference implementation,
//! a call-recording test double, and the external-process adapter.

use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{PipelineError, StageConfig};
use crate::corpus::tokenize;
use crate::corpus::Corpus;
use crate::hashing::Fnv64;

/// A sequence classifier that can be fine-tuned in stages.
///
/// Fine-tuning calls are observable in order through [`fingerprint`], which
/// digests the mutable state; prediction must be a pure function of that
/// state.
///
/// [`fingerprint`]: ClassifierBackend::fingerprint
pub trait ClassifierBackend {
    fn fine_tune(&mut self, corpus: &Corpus, stage: &StageConfig) -> Result<(), PipelineError>;
    fn predict(&self, texts: &[String]) -> Result<Vec<u8>, PipelineError>;
    fn fingerprint(&self) -> String;
    fn save(&self, path: &Path) -> Result<(), PipelineError>;
    fn load(&mut self, path: &Path) -> Result<(), PipelineError>;
}

/// Reference backend: logistic regression over hashed token counts, trained
/// by per-example gradient descent.
///
/// Deliberately tiny, yet it exposes everything the pipeline cares about:
/// learning rate and epoch count change the weights, state digests evolve
/// per stage, and training on separable data reaches perfect accuracy.
/// `lr_scale` maps transformer-scale learning rates (around 1e-5) into a
/// useful range for this model; with the default scale of 1.0 the configured
/// rate is used as-is.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashedLinearBackend {
    dim: usize,
    lr_scale: f64,
    weights: Vec<f64>,
    bias: f64,
    trained: bool,
}

impl HashedLinearBackend {
    pub fn new(dim: usize, lr_scale: f64) -> HashedLinearBackend {
        assert!(dim > 0, "feature dimension must be positive");
        HashedLinearBackend {
            dim,
            lr_scale,
            weights: vec![0.0; dim],
            bias: 0.0,
            trained: false,
        }
    }

    pub fn with_defaults() -> HashedLinearBackend {
        HashedLinearBackend::new(4096, 1.0)
    }

    fn features(&self, text: &str) -> Vec<(usize, f64)> {
        // unigrams plus adjacent bigrams: word order is the whole signal
        // when two sentences share a vocabulary
        let words: Vec<String> = tokenize::tokenize(text)
            .iter()
            .map(|t| tokenize::fold(t.text))
            .collect();
        let mut counts: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        let mut bump = |key: &str| {
            let idx = (Fnv64::new().write(key.as_bytes()).finish() % self.dim as u64) as usize;
            *counts.entry(idx).or_insert(0.0) += 1.0;
        };
        for word in &words {
            bump(word);
        }
        for pair in words.windows(2) {
            bump(&format!("{} {}", pair[0], pair[1]));
        }
        let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in counts.values_mut() {
                *v /= norm;
            }
        }
        counts.into_iter().collect()
    }

    fn decision(&self, features: &[(usize, f64)]) -> f64 {
        let z: f64 = features.iter().map(|&(i, v)| self.weights[i] * v).sum::<f64>() + self.bias;
        1.0 / (1.0 + (-z).exp())
    }
}

impl ClassifierBackend for HashedLinearBackend {
    fn fine_tune(&mut self, corpus: &Corpus, stage: &StageConfig) -> Result<(), PipelineError> {
        let labels = corpus.labels().ok_or_else(|| PipelineError::Backend {
            message: "reference backend trains on binary labels only".to_string(),
        })?;
        let lr = stage.learning_rate * self.lr_scale;
        let rows: Vec<Vec<(usize, f64)>> = corpus
            .iter()
            .map(|e| self.features(&e.text))
            .collect();
        for _ in 0..stage.epochs {
            for (features, &label) in rows.iter().zip(&labels) {
                let p = self.decision(features);
                let gradient = f64::from(label) - p;
                for &(i, v) in features {
                    self.weights[i] += lr * gradient * v;
                }
                self.bias += lr * gradient;
            }
        }
        if stage.epochs > 0 && !corpus.is_empty() {
            self.trained = true;
        }
        Ok(())
    }

    fn predict(&self, texts: &[String]) -> Result<Vec<u8>, PipelineError> {
        if !self.trained {
            return Err(PipelineError::NotTrained);
        }
        Ok(texts
            .iter()
            .map(|t| u8::from(self.decision(&self.features(t)) >= 0.5))
            .collect())
    }

    fn fingerprint(&self) -> String {
        let mut h = Fnv64::new().write_u64(self.dim as u64);
        for w in &self.weights {
            h = h.write_u64(w.to_bits());
        }
        h = h.write_u64(self.bias.to_bits());
        h = h.write_u64(u64::from(self.trained));
        format!("{:016x}", h.finish())
    }

    fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let body = serde_json::json!({
            "format": "hashed-linear/1",
            "model": self,
        });
        std::fs::write(path, serde_json::to_string(&body)?)?;
        Ok(())
    }

    fn load(&mut self, path: &Path) -> Result<(), PipelineError> {
        let raw = std::fs::read_to_string(path)?;
        let body: serde_json::Value = serde_json::from_str(&raw)?;
        if body["format"] != "hashed-linear/1" {
            return Err(PipelineError::Backend {
                message: format!("unsupported model format in {}", path.display()),
            });
        }
        *self = serde_json::from_value(body["model"].clone())?;
        Ok(())
    }
}

/// Test double that records every fine-tune call and predicts a constant.
#[derive(Debug, Default)]
pub struct RecordingBackend {
    /// One entry per fine_tune call: (example count, learning rate, epochs).
    pub calls: Vec<(usize, f64, u32)>,
    /// Texts of each stage's (shuffled) training corpus.
    pub seen_texts: Vec<Vec<String>>,
}

impl RecordingBackend {
    pub fn new() -> RecordingBackend {
        RecordingBackend::default()
    }
}

impl ClassifierBackend for RecordingBackend {
    fn fine_tune(&mut self, corpus: &Corpus, stage: &StageConfig) -> Result<(), PipelineError> {
        self.calls
            .push((corpus.len(), stage.learning_rate, stage.epochs));
        self.seen_texts
            .push(corpus.iter().map(|e| e.text.clone()).collect());
        Ok(())
    }

    fn predict(&self, texts: &[String]) -> Result<Vec<u8>, PipelineError> {
        if self.calls.is_empty() {
            return Err(PipelineError::NotTrained);
        }
        Ok(vec![1; texts.len()])
    }

    fn fingerprint(&self) -> String {
        format!("recording/{}", self.calls.len())
    }

    fn save(&self, _path: &Path) -> Result<(), PipelineError> {
        Ok(())
    }

    fn load(&mut self, _path: &Path) -> Result<(), PipelineError> {
        Ok(())
    }
}

/// Adapter driving an external classifier process over line JSON.
///
/// Request shapes:
/// `{"op":"fine_tune","texts":[..],"labels":[..],"learning_rate":..,"epochs":..,"batch_size":..}`,
/// `{"op":"predict","texts":[..]}`, `{"op":"fingerprint"}`,
/// `{"op":"save","path":".."}`, `{"op":"load","path":".."}`.
/// Responses carry `{"ok":true,...}` or `{"ok":false,"error":".."}`.
pub struct SubprocessBackend {
    client: Mutex<crate::proc::ProcClient>,
    trained: std::sync::atomic::AtomicBool,
}

impl SubprocessBackend {
    pub fn spawn(command: &str, args: &[String]) -> Result<SubprocessBackend, PipelineError> {
        let client = crate::proc::ProcClient::spawn(command, args)?;
        Ok(SubprocessBackend {
            client: Mutex::new(client),
            trained: std::sync::atomic::AtomicBool::new(false),
        })
    }

    fn call(&self, request: serde_json::Value) -> Result<serde_json::Value, PipelineError> {
        let mut client = self.client.lock().expect("adapter lock");
        let response = client.call(&request)?;
        if response["ok"] == serde_json::Value::Bool(true) {
            Ok(response)
        } else {
            Err(PipelineError::Backend {
                message: response["error"].as_str().unwrap_or("unknown").to_string(),
            })
        }
    }
}

impl ClassifierBackend for SubprocessBackend {
    fn fine_tune(&mut self, corpus: &Corpus, stage: &StageConfig) -> Result<(), PipelineError> {
        let labels = corpus.labels().ok_or_else(|| PipelineError::Backend {
            message: "subprocess backend trains on binary labels only".to_string(),
        })?;
        self.call(serde_json::json!({
            "op": "fine_tune",
            "texts": corpus.texts(),
            "labels": labels,
            "learning_rate": stage.learning_rate,
            "epochs": stage.epochs,
            "batch_size": stage.batch_size,
        }))?;
        self.trained.store(true, std::sync::atomic::Ordering::SeqCst);
        Ok(())
    }

    fn predict(&self, texts: &[String]) -> Result<Vec<u8>, PipelineError> {
        if !self.trained.load(std::sync::atomic::Ordering::SeqCst) {
            return Err(PipelineError::NotTrained);
        }
        let response = self.call(serde_json::json!({"op": "predict", "texts": texts}))?;
        let labels = response["labels"]
            .as_array()
            .ok_or_else(|| PipelineError::Backend {
                message: "predict response missing labels".to_string(),
            })?;
        labels
            .iter()
            .map(|v| {
                v.as_u64()
                    .filter(|&l| l <= 1)
                    .map(|l| l as u8)
                    .ok_or_else(|| PipelineError::Backend {
                        message: format!("bad label in predict response: {v}"),
                    })
            })
            .collect()
    }

    fn fingerprint(&self) -> String {
        match self.call(serde_json::json!({"op": "fingerprint"})) {
            Ok(response) => response["fingerprint"]
                .as_str()
                .unwrap_or("unavailable")
                .to_string(),
            Err(_) => "unavailable".to_string(),
        }
    }

    fn save(&self, path: &Path) -> Result<(), PipelineError> {
        self.call(serde_json::json!({"op": "save", "path": path.display().to_string()}))?;
        Ok(())
    }

    fn load(&mut self, path: &Path) -> Result<(), PipelineError> {
        self.call(serde_json::json!({"op": "load", "path": path.display().to_string()}))?;
        self.trained.store(true, std::sync::atomic::Ordering::SeqCst);
        Ok(())
    }
}
