//! Sentence encoders: fixed-dimension embeddings for the regressor suite.
//!
//! The reference encoder hashes token n-grams into a configurable number of
//! dimensions; the external adapter defers to a subprocess hosting a real
//! multilingual encoder (conventionally 512-dimensional).

use std::sync::Mutex;

use super::BaselineError;
use crate::corpus::tokenize;
use crate::hashing::Fnv64;
use crate::par;

/// Maps texts to equal-length real vectors, deterministically within a run.
pub trait SentenceEncoder {
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BaselineError>;
    fn dim(&self) -> usize;
}

/// Deterministic hashing encoder: signed token n-gram counts folded into
/// `dim` buckets, L2-normalized.
#[derive(Debug, Clone)]
pub struct HashingEncoder {
    dim: usize,
    ngram_max: usize,
}

impl HashingEncoder {
    pub fn new(dim: usize, ngram_max: usize) -> HashingEncoder {
        assert!(dim > 0 && ngram_max > 0);
        HashingEncoder { dim, ngram_max }
    }

    pub fn with_defaults() -> HashingEncoder {
        HashingEncoder::new(256, 2)
    }

    fn encode_one(&self, text: &str) -> Vec<f64> {
        let words: Vec<String> = tokenize::tokenize(text)
            .iter()
            .map(|t| tokenize::fold(t.text))
            .collect();
        let mut vector = vec![0.0; self.dim];
        for n in 1..=self.ngram_max {
            for window in words.windows(n) {
                let gram = window.join(" ");
                let hash = Fnv64::new().write(gram.as_bytes()).finish();
                let bucket = (hash % self.dim as u64) as usize;
                let sign = if hash >> 63 == 0 { 1.0 } else { -1.0 };
                vector[bucket] += sign;
            }
        }
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        vector
    }
}

impl SentenceEncoder for HashingEncoder {
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BaselineError> {
        Ok(par::map(texts, |t| self.encode_one(t)))
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

/// Adapter hosting an external encoder process over line JSON.
///
/// Protocol: `{"op":"encode","texts":[..]}` answered by
/// `{"ok":true,"vectors":[[..],..]}`; vector length must equal the declared
/// dimension.
pub struct SubprocessEncoder {
    client: Mutex<crate::proc::ProcClient>,
    dim: usize,
}

impl SubprocessEncoder {
    pub fn spawn(command: &str, args: &[String], dim: usize) -> Result<SubprocessEncoder, BaselineError> {
        let client = crate::proc::ProcClient::spawn(command, args)
            .map_err(|e| BaselineError::Encoder {
                message: e.to_string(),
            })?;
        Ok(SubprocessEncoder {
            client: Mutex::new(client),
            dim,
        })
    }
}

impl SentenceEncoder for SubprocessEncoder {
    fn encode(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BaselineError> {
        let mut client = self.client.lock().expect("encoder lock");
        let response = client
            .call(&serde_json::json!({"op": "encode", "texts": texts}))
            .map_err(|e| BaselineError::Encoder {
                message: e.to_string(),
            })?;
        if response["ok"] != serde_json::Value::Bool(true) {
            return Err(BaselineError::Encoder {
                message: response["error"].as_str().unwrap_or("unknown").to_string(),
            });
        }
        let vectors: Vec<Vec<f64>> = serde_json::from_value(response["vectors"].clone())
            .map_err(|e| BaselineError::Encoder {
                message: format!("bad vectors payload: {e}"),
            })?;
        if vectors.len() != texts.len() {
            return Err(BaselineError::Encoder {
                message: format!("{} texts in, {} vectors out", texts.len(), vectors.len()),
            });
        }
        for v in &vectors {
            if v.len() != self.dim {
                return Err(BaselineError::Encoder {
                    message: format!("expected {}-dimensional vectors, got {}", self.dim, v.len()),
                });
            }
        }
        Ok(vectors)
    }

    fn dim(&self) -> usize {
        self.dim
    }
}
