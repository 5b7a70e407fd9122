//! Task corpora: parsing, document-frequency statistics, noun-pair and
//! pattern extraction, and pattern-held-out dev/validation splitting.
//!
//! A sentence like *"I don't like beer, a special kind of drink"* carries two
//! noun slots; replacing them with a placeholder yields its pattern
//! `I don't like ⟨B⟩, a special kind of ⟨B⟩`. Nouns are found by a
//! document-frequency heuristic (rare tokens are nouns), and splits can hold
//! entire patterns out of the development set to probe generalization.

mod parse;
mod split;
pub mod tokenize;

pub use parse::{parse_task_file, parse_task_str, ColumnMap};
pub use split::{split_dev_validation, SplitConfig};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hashing::Fnv64;
use crate::par;
use tokenize::{fold, tokenize};

/// Placeholder standing in for a noun slot inside a pattern template.
///
/// Non-alphabetic on purpose: the tokenizer never produces it, so it cannot
/// collide with corpus vocabulary.
pub const PLACEHOLDER: &str = "⟨B⟩";

/// The three task languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Fr,
    It,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::En, Language::Fr, Language::It];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Fr => "fr",
            Language::It => "it",
        }
    }

    /// Infer the language from a `_en`/`_fr`/`_it` file-name suffix.
    pub fn from_path(path: &Path) -> Option<Language> {
        let stem = path.file_stem()?.to_str()?;
        Language::ALL
            .into_iter()
            .find(|l| stem.ends_with(&format!("_{}", l.code())))
    }
}

impl std::str::FromStr for Language {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Language::En),
            "fr" => Ok(Language::Fr),
            "it" => Ok(Language::It),
            other => Err(CorpusError::UnknownLanguage(other.to_string())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Which annotation a task file carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    /// Binary acceptability labels in {0, 1}.
    Binary,
    /// Seven-point Likert scores in [1.0, 7.0].
    Likert,
}

/// Exactly one of a binary label or a Likert score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Annotation {
    Label(u8),
    Score(f64),
}

impl Annotation {
    pub fn label(self) -> Option<u8> {
        match self {
            Annotation::Label(l) => Some(l),
            Annotation::Score(_) => None,
        }
    }

    pub fn score(self) -> Option<f64> {
        match self {
            Annotation::Score(s) => Some(s),
            Annotation::Label(_) => None,
        }
    }

    pub fn mode(self) -> TaskMode {
        match self {
            Annotation::Label(_) => TaskMode::Binary,
            Annotation::Score(_) => TaskMode::Likert,
        }
    }
}

/// One annotated sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub language: Language,
    pub annotation: Annotation,
}

impl Example {
    pub fn label(&self) -> Option<u8> {
        self.annotation.label()
    }

    pub fn score(&self) -> Option<f64> {
        self.annotation.score()
    }
}

/// The two noun slots of a sentence, with their byte spans.
///
/// Spans are half-open byte ranges into the sentence text; the first span
/// ends at or before the second begins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPair {
    pub noun1: String,
    pub noun2: String,
    pub span1: Range<usize>,
    pub span2: Range<usize>,
}

impl NounPair {
    /// Build a pair from two spans into `text`, validating ordering and that
    /// each span exactly delimits a token.
    pub fn from_spans(
        text: &str,
        span1: Range<usize>,
        span2: Range<usize>,
    ) -> Result<NounPair, CorpusError> {
        if span1.end > span2.start {
            return Err(CorpusError::OverlappingSpans);
        }
        for span in [&span1, &span2] {
            let valid = span.start < span.end
                && span.end <= text.len()
                && text.is_char_boundary(span.start)
                && text.is_char_boundary(span.end);
            if !valid {
                return Err(CorpusError::InvalidSpan {
                    span: span.start..span.end,
                });
            }
        }
        Ok(NounPair {
            noun1: text[span1.clone()].to_string(),
            noun2: text[span2.clone()].to_string(),
            span1,
            span2,
        })
    }
}

/// A sentence template with both noun slots replaced by [`PLACEHOLDER`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub template: String,
    pub language: Language,
}

impl Pattern {
    pub fn new(template: impl Into<String>, language: Language) -> Pattern {
        Pattern {
            template: template.into(),
            language,
        }
    }

    /// Substitute a noun pair back into the template.
    ///
    /// For a pattern produced by [`derive_pattern`], substituting the same
    /// pair reproduces the source sentence byte for byte.
    pub fn substitute(&self, noun1: &str, noun2: &str) -> String {
        let first = self.template.replacen(PLACEHOLDER, noun1, 1);
        first.replacen(PLACEHOLDER, noun2, 1)
    }

    pub fn placeholder_count(&self) -> usize {
        self.template.matches(PLACEHOLDER).count()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.template)
    }
}

/// An ordered collection of examples in one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub language: Language,
    pub examples: Vec<Example>,
}

impl Corpus {
    /// Build a corpus, rejecting examples whose language disagrees.
    pub fn new(language: Language, examples: Vec<Example>) -> Result<Corpus, CorpusError> {
        if let Some(e) = examples.iter().find(|e| e.language != language) {
            return Err(CorpusError::MixedLanguage {
                id: e.id.clone(),
                expected: language,
                found: e.language,
            });
        }
        Ok(Corpus {
            language,
            examples,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.examples.iter().map(|e| e.text.as_str()).collect()
    }

    /// Binary labels for every example, or `None` if any example is Likert.
    pub fn labels(&self) -> Option<Vec<u8>> {
        self.examples.iter().map(|e| e.label()).collect()
    }

    /// Likert scores for every example, or `None` if any example is binary.
    pub fn scores(&self) -> Option<Vec<f64>> {
        self.examples.iter().map(|e| e.score()).collect()
    }

    /// Task mode, if the corpus is non-empty and homogeneous.
    pub fn mode(&self) -> Option<TaskMode> {
        let first = self.examples.first()?.annotation.mode();
        self.examples
            .iter()
            .all(|e| e.annotation.mode() == first)
            .then_some(first)
    }

    /// Stable content digest over ids, texts and annotations.
    pub fn fingerprint(&self) -> String {
        let mut h = Fnv64::new().write(self.language.code().as_bytes());
        for e in &self.examples {
            h = h.write(e.id.as_bytes()).write(e.text.as_bytes());
            h = match e.annotation {
                Annotation::Label(l) => h.write_u64(u64::from(l)),
                Annotation::Score(s) => h.write_u64(s.to_bits()),
            };
        }
        format!("{:016x}", h.finish())
    }
}

/// Per-token document frequencies for one corpus.
///
/// `df(t)` is the fraction of examples whose case-folded token *set* contains
/// `t`; term frequency within an example does not matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfIndex {
    pub num_documents: usize,
    df: BTreeMap<String, f64>,
}

impl DfIndex {
    pub fn df(&self, token: &str) -> Option<f64> {
        self.df.get(&fold(token)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.df.iter().map(|(t, &v)| (t.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }
}

/// Errors from corpus construction and preparation.
#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("unknown language `{0}` (expected en, fr or it)")]
    UnknownLanguage(String),
    #[error("missing column `{column}` in input")]
    MissingColumn { column: String },
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("example `{id}` is {found} but the corpus is {expected}")]
    MixedLanguage {
        id: String,
        expected: Language,
        found: Language,
    },
    #[error("operation requires a non-empty corpus")]
    EmptyCorpus,
    #[error("found {found} token(s) under the document-frequency threshold, need 2")]
    TooFewNouns { found: usize },
    #[error("noun spans overlap or are out of order")]
    OverlappingSpans,
    #[error("span {span:?} does not delimit a token")]
    InvalidSpan { span: Range<usize> },
    #[error(
        "held-out patterns cover {covered} of {total} examples; \
         a {dev_fraction} dev fraction needs {needed} free examples"
    )]
    InfeasibleSplit {
        covered: usize,
        total: usize,
        needed: usize,
        dev_fraction: f64,
    },
    #[error("dev fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Compute document frequencies over a corpus.
pub fn build_df_index(corpus: &Corpus) -> Result<DfIndex, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let sets = par::map(&corpus.examples, |e| tokenize::token_set(&e.text));
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for set in sets {
        for token in set {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let n = corpus.len() as f64;
    let df = counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / n))
        .collect();
    Ok(DfIndex {
        num_documents: corpus.len(),
        df,
    })
}

/// Pick the two rarest tokens of an example as its noun pair.
///
/// Candidates are token occurrences with document frequency strictly below
/// `threshold`. With more than two candidates the two lowest-df occurrences
/// win, ties going to the earlier position; the chosen pair is returned in
/// textual order. Fewer than two candidates is an error carrying the count,
/// so callers can decide whether to fall back.
pub fn extract_nouns(
    example: &Example,
    df_index: &DfIndex,
    threshold: f64,
) -> Result<NounPair, CorpusError> {
    select_nouns(example, df_index, Some(threshold))
}

/// Default document-frequency threshold below which a token counts as a noun.
pub const DF_NOUN_THRESHOLD: f64 = 0.05;

/// [`extract_nouns`], falling back to the two lowest-df tokens overall when
/// fewer than two fall under the threshold. The flag reports the fallback.
pub fn extract_nouns_with_fallback(
    example: &Example,
    df_index: &DfIndex,
    threshold: f64,
) -> Result<(NounPair, bool), CorpusError> {
    match select_nouns(example, df_index, Some(threshold)) {
        Ok(pair) => Ok((pair, false)),
        Err(CorpusError::TooFewNouns { .. }) => {
            select_nouns(example, df_index, None).map(|p| (p, true))
        }
        Err(e) => Err(e),
    }
}

fn select_nouns(
    example: &Example,
    df_index: &DfIndex,
    threshold: Option<f64>,
) -> Result<NounPair, CorpusError> {
    let tokens = tokenize(&example.text);
    // (df, position, span) per qualifying occurrence
    let mut candidates: Vec<(f64, usize, Range<usize>)> = Vec::new();
    for (pos, tok) in tokens.iter().enumerate() {
        let df = df_index.df(tok.text).unwrap_or(1.0);
        if threshold.map_or(true, |t| df < t) {
            candidates.push((df, pos, tok.span.clone()));
        }
    }
    if candidates.len() < 2 {
        return Err(CorpusError::TooFewNouns {
            found: candidates.len(),
        });
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut chosen = [&candidates[0], &candidates[1]];
    chosen.sort_by_key(|c| c.1);
    NounPair::from_spans(&example.text, chosen[0].2.clone(), chosen[1].2.clone())
}

/// Replace an example's noun spans with the placeholder token.
pub fn derive_pattern(example: &Example, nouns: &NounPair) -> Result<Pattern, CorpusError> {
    // Re-validate against this text; the pair may come from elsewhere.
    let pair = NounPair::from_spans(&example.text, nouns.span1.clone(), nouns.span2.clone())?;
    if pair.noun1 != nouns.noun1 || pair.noun2 != nouns.noun2 {
        return Err(CorpusError::InvalidSpan {
            span: nouns.span1.clone(),
        });
    }
    let text = &example.text;
    let mut template = String::with_capacity(text.len());
    template.push_str(&text[..nouns.span1.start]);
    template.push_str(PLACEHOLDER);
    template.push_str(&text[nouns.span1.end..nouns.span2.start]);
    template.push_str(PLACEHOLDER);
    template.push_str(&text[nouns.span2.end..]);
    Ok(Pattern {
        template,
        language: example.language,
    })
}

/// Derive the pattern of an example directly, using the fallback extraction.
pub fn pattern_of(
    example: &Example,
    df_index: &DfIndex,
    threshold: f64,
) -> Result<(Pattern, bool), CorpusError> {
    let (nouns, fell_back) = extract_nouns_with_fallback(example, df_index, threshold)?;
    derive_pattern(example, &nouns).map(|p| (p, fell_back))
}

/// A pattern-constrained development/validation split.
#[derive(Debug, Clone)]
pub struct DevValSplit {
    pub dev: Corpus,
    pub val: Corpus,
    pub held_out_patterns: std::collections::BTreeSet<Pattern>,
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example(id: &str, text: &str, label: u8) -> Example {
        Example {
            id: id.to_string(),
            text: text.to_string(),
            language: Language::En,
            annotation: Annotation::Label(label),
        }
    }

    fn corpus_of(texts: &[&str]) -> Corpus {
        let examples = texts
            .iter()
            .enumerate()
            .map(|(i, t)| example(&i.to_string(), t, 1))
            .collect();
        Corpus::new(Language::En, examples).unwrap()
    }

    #[test]
    fn df_counts_documents_not_terms() {
        // one sentence mentions beer twice; df must still be 1/N
        let mut texts = vec!["beer beer is here"];
        for _ in 0..9 {
            texts.push("nothing to see");
        }
        let corpus = corpus_of(&texts);
        let df = build_df_index(&corpus).unwrap();
        assert_eq!(df.df("beer"), Some(0.1));
    }

    #[test]
    fn df_brute_force_oracle() {
        // 100 sentences, "beer" in exactly 2 of them
        let mut texts: Vec<String> = (0..98).map(|i| format!("filler sentence number {i}")).collect();
        texts.push("I like beer a lot".to_string());
        texts.push("beer again".to_string());
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let corpus = corpus_of(&refs);
        let df = build_df_index(&corpus).unwrap();

        // independent containment count
        let oracle = |token: &str| {
            let hits = corpus
                .iter()
                .filter(|e| tokenize::token_set(&e.text).contains(token))
                .count();
            hits as f64 / corpus.len() as f64
        };
        assert_eq!(df.df("beer"), Some(oracle("beer")));
        assert_eq!(df.df("beer"), Some(0.02));
        // "sentence" appears in 98 of 100
        assert_eq!(df.df("sentence"), Some(oracle("sentence")));
    }

    #[test]
    fn df_universal_token_is_one() {
        let corpus = corpus_of(&["the cat", "the dog", "the fish"]);
        let df = build_df_index(&corpus).unwrap();
        assert_eq!(df.df("the"), Some(1.0));
    }

    #[test]
    fn df_empty_corpus_rejected() {
        let corpus = Corpus::new(Language::En, vec![]).unwrap();
        assert!(matches!(
            build_df_index(&corpus),
            Err(CorpusError::EmptyCorpus)
        ));
    }

    /// Corpus where the target sentence's nouns are rare and everything else
    /// is shared filler.
    fn noun_fixture() -> (Corpus, DfIndex) {
        let mut texts = vec!["I don't like beer, a special kind of drink".to_string()];
        for i in 0..99 {
            texts.push(format!(
                "I don't like nothing, a special kind of thing {i}"
            ));
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let corpus = corpus_of(&refs);
        let df = build_df_index(&corpus).unwrap();
        (corpus, df)
    }

    #[test]
    fn extracts_the_two_rare_tokens() {
        let (corpus, df) = noun_fixture();
        let pair = extract_nouns(&corpus.examples[0], &df, 0.05).unwrap();
        assert_eq!(pair.noun1, "beer");
        assert_eq!(pair.noun2, "drink");
    }

    #[test]
    fn no_candidates_reports_count() {
        let corpus = corpus_of(&["a b c", "a b c", "a b c"]);
        let df = build_df_index(&corpus).unwrap();
        match extract_nouns(&corpus.examples[0], &df, 0.05) {
            Err(CorpusError::TooFewNouns { found }) => assert_eq!(found, 0),
            other => panic!("expected TooFewNouns, got {other:?}"),
        }
    }

    #[test]
    fn lowest_two_dfs_win() {
        // dfs: rare1 -> 0.01, rare2 -> 0.02, rare4 -> 0.04 within 100 docs
        let mut texts = vec!["filler rare1 rare2 rare4 here".to_string()];
        texts.push("filler rare2 words rare4 here".to_string());
        for _ in 0..2 {
            texts.push("filler words rare4 again here".to_string());
        }
        for i in 0..96 {
            texts.push(format!("filler words again here {i}"));
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let corpus = corpus_of(&refs);
        let df = build_df_index(&corpus).unwrap();
        assert_eq!(df.df("rare1"), Some(0.01));
        assert_eq!(df.df("rare2"), Some(0.02));
        assert_eq!(df.df("rare4"), Some(0.04));

        // enumerate all pairs, pick the lowest-df pair
        let toks = tokenize(&corpus.examples[0].text);
        let mut best: Option<(f64, &str, &str)> = None;
        for i in 0..toks.len() {
            for j in i + 1..toks.len() {
                let (a, b) = (toks[i].text, toks[j].text);
                let sum = df.df(a).unwrap() + df.df(b).unwrap();
                if best.is_none() || sum < best.unwrap().0 {
                    best = Some((sum, a, b));
                }
            }
        }
        let (_, want1, want2) = best.unwrap();

        let pair = extract_nouns(&corpus.examples[0], &df, 0.05).unwrap();
        assert_eq!((pair.noun1.as_str(), pair.noun2.as_str()), (want1, want2));
        assert_eq!((want1, want2), ("rare1", "rare2"));
    }

    #[test]
    fn fallback_uses_lowest_overall() {
        let corpus = corpus_of(&["the common cat", "the common dog", "the common cat"]);
        let df = build_df_index(&corpus).unwrap();
        let e = &corpus.examples[1];
        assert!(extract_nouns(e, &df, 0.05).is_err());
        let (pair, fell_back) = extract_nouns_with_fallback(e, &df, 0.05).unwrap();
        assert!(fell_back);
        // dog (1/3) is rarest; next lowest among the rest is a tie at 1.0,
        // broken by position -> "the"
        assert_eq!(pair.noun1, "the");
        assert_eq!(pair.noun2, "dog");
    }

    #[test]
    fn pattern_round_trip_is_exact() {
        let (corpus, df) = noun_fixture();
        let e = &corpus.examples[0];
        let pair = extract_nouns(e, &df, 0.05).unwrap();
        let pattern = derive_pattern(e, &pair).unwrap();
        assert_eq!(
            pattern.template,
            "I don't like ⟨B⟩, a special kind of ⟨B⟩"
        );
        assert_eq!(pattern.placeholder_count(), 2);
        assert_eq!(pattern.substitute(&pair.noun1, &pair.noun2), e.text);
    }

    #[test]
    fn pattern_at_sentence_start() {
        let e = example("1", "Beer is a drink, really.", 1);
        let toks = tokenize(&e.text);
        let pair =
            NounPair::from_spans(&e.text, toks[0].span.clone(), toks[3].span.clone()).unwrap();
        let pattern = derive_pattern(&e, &pair).unwrap();
        assert_eq!(pattern.template, "⟨B⟩ is a ⟨B⟩, really.");
        assert_eq!(pattern.substitute("Beer", "drink"), e.text);
    }

    #[test]
    fn overlapping_spans_rejected() {
        let text = "overlap here";
        assert!(matches!(
            NounPair::from_spans(text, 0..7, 4..11),
            Err(CorpusError::OverlappingSpans)
        ));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = corpus_of(&["one", "two"]);
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.examples[1].text = "three".to_string();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
