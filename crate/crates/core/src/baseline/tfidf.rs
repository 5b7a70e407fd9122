//! TF-IDF vectorization over word (default) or character n-grams.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{BaselineError, SparseMatrix, SparseRow};
use crate::corpus::tokenize;
use crate::corpus::Corpus;

/// Knobs for [`fit_tfidf`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfOptions {
    /// Largest n-gram order; all orders 1..=n are included.
    pub ngram_max: usize,
    /// Character n-grams instead of word n-grams.
    pub char_mode: bool,
}

impl Default for TfidfOptions {
    fn default() -> TfidfOptions {
        TfidfOptions {
            ngram_max: 3,
            char_mode: false,
        }
    }
}

/// Fitted TF-IDF weights with a closed vocabulary.
///
/// Column order is first-encounter order over the fitting corpus, so
/// fitting the same corpus twice yields identical matrices. Transform uses
/// raw term counts scaled by smoothed idf, then L2-normalizes each row;
/// n-grams outside the vocabulary contribute nothing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfVectorizer {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    options: TfidfOptions,
}

impl TfidfVectorizer {
    pub fn vocabulary_len(&self) -> usize {
        self.terms.len()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.lookup(term).map(|i| self.idf[i])
    }

    fn lookup(&self, term: &str) -> Option<usize> {
        if self.index.is_empty() && !self.terms.is_empty() {
            // deserialized without the derived index; fall back to scan
            return self.terms.iter().position(|t| t == term);
        }
        self.index.get(term).copied()
    }

    /// Rebuild the term → column map after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    fn ngrams(&self, text: &str) -> Vec<String> {
        extract_ngrams(text, &self.options)
    }

    /// Vectorize texts against the fitted vocabulary.
    pub fn transform(&self, texts: &[String]) -> SparseMatrix {
        let rows = crate::par::map(texts, |text| {
            let mut counts: HashMap<usize, f64> = HashMap::new();
            for gram in self.ngrams(text) {
                if let Some(col) = self.lookup(&gram) {
                    *counts.entry(col).or_insert(0.0) += 1.0;
                }
            }
            let mut row: SparseRow = counts
                .into_iter()
                .map(|(col, tf)| (col, tf * self.idf[col]))
                .collect();
            row.sort_by_key(|&(col, _)| col);
            let norm = row.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in &mut row {
                    *v /= norm;
                }
            }
            row
        });
        SparseMatrix {
            rows,
            cols: self.terms.len(),
        }
    }
}

fn extract_ngrams(text: &str, options: &TfidfOptions) -> Vec<String> {
    let mut grams = Vec::new();
    if options.char_mode {
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        for n in 1..=options.ngram_max {
            for window in chars.windows(n) {
                grams.push(window.iter().collect());
            }
        }
    } else {
        let words: Vec<String> = tokenize::tokenize(text)
            .iter()
            .map(|t| tokenize::fold(t.text))
            .collect();
        for n in 1..=options.ngram_max {
            for window in words.windows(n) {
                grams.push(window.join(" "));
            }
        }
    }
    grams
}

/// Fit idf weights and the vocabulary on a corpus.
///
/// `idf(t) = ln((1+N)/(1+df(t))) + 1` with `df` counted over documents, so
/// weights stay finite and positive even for terms in every document.
pub fn fit_tfidf(corpus: &Corpus, options: &TfidfOptions) -> Result<TfidfVectorizer, BaselineError> {
    if corpus.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    if options.ngram_max == 0 {
        return Err(BaselineError::Parameter {
            message: "ngram_max must be at least 1".to_string(),
        });
    }
    let mut terms: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut df: Vec<usize> = Vec::new();
    for example in corpus.iter() {
        let grams = extract_ngrams(&example.text, options);
        let unique: BTreeSet<&String> = grams.iter().collect();
        let mut seen_cols: BTreeSet<usize> = BTreeSet::new();
        // first-encounter order within the document follows gram order
        for gram in &grams {
            if !index.contains_key(gram) {
                index.insert(gram.clone(), terms.len());
                terms.push(gram.clone());
                df.push(0);
            }
        }
        for gram in unique {
            seen_cols.insert(index[gram]);
        }
        for col in seen_cols {
            df[col] += 1;
        }
    }
    let n = corpus.len() as f64;
    let idf = df
        .iter()
        .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    Ok(TfidfVectorizer {
        terms,
        index,
        idf,
        options: options.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Annotation, Example, Language};

    fn corpus(texts: &[&str]) -> Corpus {
        let examples = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Example {
                id: i.to_string(),
                text: t.to_string(),
                language: Language::En,
                annotation: Annotation::Label(1),
            })
            .collect();
        Corpus::new(Language::En, examples).unwrap()
    }

    #[test]
    fn smoothed_idf_matches_hand_computation() {
        let v = fit_tfidf(&corpus(&["a b", "a c"]), &TfidfOptions::default()).unwrap();
        assert_eq!(v.idf("a"), Some(1.0));
        let expected_b = (3.0f64 / 2.0).ln() + 1.0;
        assert!((v.idf("b").unwrap() - expected_b).abs() < 1e-12);
        assert!((v.idf("b").unwrap() - 1.405_465).abs() < 1e-6);
        assert_eq!(v.idf("b"), v.idf("c"));
        assert_eq!(v.idf("a b"), v.idf("b"), "bigrams counted like any term");
    }

    #[test]
    fn idf_positive_and_finite_everywhere() {
        let v = fit_tfidf(
            &corpus(&["the cat sat", "the dog sat", "the cow stood"]),
            &TfidfOptions::default(),
        )
        .unwrap();
        for i in 0..v.vocabulary_len() {
            let term = &v.terms[i];
            let idf = v.idf(term).unwrap();
            assert!(idf.is_finite() && idf > 0.0, "{term}: {idf}");
        }
    }

    #[test]
    fn transform_rows_are_unit_norm() {
        let c = corpus(&["a b c d", "b c d e", "c d e f"]);
        let v = fit_tfidf(&c, &TfidfOptions::default()).unwrap();
        let texts: Vec<String> = c.texts().iter().map(|s| s.to_string()).collect();
        let m = v.transform(&texts);
        for row in &m.rows {
            let norm: f64 = row.iter().map(|&(_, x)| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unseen_ngrams_contribute_zero() {
        let v = fit_tfidf(&corpus(&["a b", "a c"]), &TfidfOptions::default()).unwrap();
        let m = v.transform(&["z q entirely new".to_string()]);
        assert!(m.rows[0].is_empty());

        let m = v.transform(&["a z".to_string()]);
        // only "a" is known; its normalized weight is 1
        assert_eq!(m.rows[0].len(), 1);
        assert!((m.rows[0][0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refit_is_reproducible() {
        let c = corpus(&["one two three", "two three four", "three four five"]);
        let texts: Vec<String> = c.texts().iter().map(|s| s.to_string()).collect();
        let a = fit_tfidf(&c, &TfidfOptions::default()).unwrap();
        let b = fit_tfidf(&c, &TfidfOptions::default()).unwrap();
        assert_eq!(a.terms, b.terms);
        assert_eq!(a.idf, b.idf);
        assert_eq!(a.transform(&texts), b.transform(&texts));
    }

    #[test]
    fn ngram_orders_up_to_three() {
        let v = fit_tfidf(&corpus(&["a b c d"]), &TfidfOptions::default()).unwrap();
        for gram in ["a", "b c", "b c d"] {
            assert!(v.idf(gram).is_some(), "missing {gram}");
        }
        assert!(v.idf("a b c d").is_none(), "4-grams out of range");
    }

    #[test]
    fn char_mode_uses_character_windows() {
        let v = fit_tfidf(
            &corpus(&["abc"]),
            &TfidfOptions {
                ngram_max: 2,
                char_mode: true,
            },
        )
        .unwrap();
        for gram in ["a", "b", "c", "ab", "bc"] {
            assert!(v.idf(gram).is_some(), "missing {gram}");
        }
        assert!(v.idf("abc").is_none());
    }

    #[test]
    fn empty_corpus_rejected() {
        let c = Corpus::new(Language::En, vec![]).unwrap();
        assert!(matches!(
            fit_tfidf(&c, &TfidfOptions::default()),
            Err(BaselineError::EmptyCorpus)
        ));
    }

    #[test]
    fn serialization_preserves_behavior() {
        let c = corpus(&["alpha beta gamma", "beta gamma delta"]);
        let texts: Vec<String> = c.texts().iter().map(|s| s.to_string()).collect();
        let v = fit_tfidf(&c, &TfidfOptions::default()).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let mut back: TfidfVectorizer = serde_json::from_str(&json).unwrap();
        back.reindex();
        assert_eq!(v.transform(&texts), back.transform(&texts));
    }
}
