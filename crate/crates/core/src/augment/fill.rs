//! Contextual insertion and substitution.
//!
//! Both operations mask a slot in the token sequence, ask a fill model for
//! ranked candidates, and splice the winner back into the raw sentence so
//! punctuation and spacing outside the edited slots survive untouched.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AugmentError, AugmentedCorpus, AugmentedExample, EditOperation};
use crate::corpus::tokenize::{self, Token};
use crate::corpus::{Corpus, Example};
use crate::hashing::{derive_seed, hash_bytes};
use crate::par;

/// Mask token a fill model sees at the slot being filled.
pub const MASK: &str = "[MASK]";

/// One ranked suggestion from a fill model.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub token: String,
    pub score: f64,
}

impl Candidate {
    pub fn new(token: impl Into<String>, score: f64) -> Candidate {
        Candidate {
            token: token.into(),
            score,
        }
    }
}

/// A model that proposes tokens for a masked slot.
///
/// `tokens` is the sentence's token sequence with [`MASK`] at `position`.
/// Returned candidates are ordered best first; an empty vector means the
/// model abstains for this context.
pub trait ContextualFillModel {
    fn suggest(&self, tokens: &[String], position: usize) -> Vec<Candidate>;
}

/// Always proposes the same token. Handy for tests and smoke runs.
#[derive(Debug, Clone)]
pub struct ConstantFill(pub String);

impl ContextualFillModel for ConstantFill {
    fn suggest(&self, _tokens: &[String], _position: usize) -> Vec<Candidate> {
        vec![Candidate::new(self.0.clone(), 1.0)]
    }
}

/// Never proposes anything.
#[derive(Debug, Clone, Copy)]
pub struct AbstainFill;

impl ContextualFillModel for AbstainFill {
    fn suggest(&self, _tokens: &[String], _position: usize) -> Vec<Candidate> {
        Vec::new()
    }
}

/// Deterministic pseudo-contextual model: hashes the masked context to pick
/// a few ranked words from a fixed lexicon. Different contexts get different
/// suggestions, and the same context always gets the same ones.
#[derive(Debug, Clone)]
pub struct LexiconFill {
    words: Vec<String>,
}

impl LexiconFill {
    pub fn new(words: Vec<String>) -> LexiconFill {
        assert!(!words.is_empty(), "lexicon must not be empty");
        LexiconFill { words }
    }

    pub fn english() -> LexiconFill {
        LexiconFill::new(
            [
                "really", "quite", "often", "certainly", "generally", "special", "common",
                "particular", "favorite", "typical", "ordinary", "fine",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        )
    }
}

impl ContextualFillModel for LexiconFill {
    fn suggest(&self, tokens: &[String], position: usize) -> Vec<Candidate> {
        let mut key = position.to_string();
        for t in tokens {
            key.push('\u{1f}');
            key.push_str(t);
        }
        let base = hash_bytes(key.as_bytes()) as usize;
        (0..3.min(self.words.len()))
            .map(|rank| {
                let word = &self.words[(base + rank) % self.words.len()];
                Candidate::new(word.clone(), 1.0 - rank as f64 * 0.1)
            })
            .collect()
    }
}

/// Knobs for the corpus-level augmentation driver.
#[derive(Debug, Clone)]
pub struct AugmentOptions {
    /// Insertion-augmented copies per example.
    pub insert_variants: usize,
    /// Substitution-augmented copies per positive example.
    pub substitute_variants: usize,
    /// Upper bound on token edits per copy.
    pub max_edits: usize,
}

impl Default for AugmentOptions {
    fn default() -> AugmentOptions {
        AugmentOptions {
            insert_variants: 1,
            substitute_variants: 1,
            max_edits: 2,
        }
    }
}

/// Insert `k ~ Uniform{1..max_edits}` context-suggested tokens at distinct
/// gaps of the sentence.
///
/// The gap before a capitalized sentence-initial token is not eligible, so
/// casing never degenerates. When the model abstains (or yields only
/// punctuation) at every gap, the source text passes through with
/// `skipped = true` and zero edits.
pub fn contextual_insert(
    example: &Example,
    fill: &dyn ContextualFillModel,
    max_edits: usize,
    seed: u64,
) -> Result<AugmentedExample, AugmentError> {
    if max_edits == 0 {
        return Err(AugmentError::NoEditBudget);
    }
    let tokens = tokenize::tokenize(&example.text);
    if tokens.is_empty() {
        return Err(AugmentError::EmptyText {
            id: example.id.clone(),
        });
    }
    let words: Vec<String> = tokens.iter().map(|t| t.text.to_string()).collect();
    let n = words.len();

    let skip_leading_gap = words[0].chars().next().is_some_and(char::is_uppercase);
    let mut gaps: Vec<usize> = (usize::from(skip_leading_gap)..=n).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_edits);
    gaps.shuffle(&mut rng);

    let mut chosen: Vec<(usize, String)> = Vec::new();
    for gap in gaps {
        if chosen.len() == k {
            break;
        }
        let mut masked = words.clone();
        masked.insert(gap, MASK.to_string());
        if let Some(c) = first_usable(fill.suggest(&masked, gap), None) {
            chosen.push((gap, c));
        }
    }

    let edits = chosen.len();
    let text = splice_insertions(&example.text, &tokens, chosen);
    Ok(build(example, text, EditOperation::Insert, edits))
}

/// Replace `k ~ Uniform{1..max_edits}` distinct tokens with
/// context-suggested different words. Restricted to label-1 sentences.
pub fn contextual_substitute(
    example: &Example,
    fill: &dyn ContextualFillModel,
    max_edits: usize,
    seed: u64,
) -> Result<AugmentedExample, AugmentError> {
    if max_edits == 0 {
        return Err(AugmentError::NoEditBudget);
    }
    if example.label() != Some(1) {
        return Err(AugmentError::SubstituteOnNegative {
            id: example.id.clone(),
        });
    }
    let tokens = tokenize::tokenize(&example.text);
    if tokens.is_empty() {
        return Err(AugmentError::EmptyText {
            id: example.id.clone(),
        });
    }
    let words: Vec<String> = tokens.iter().map(|t| t.text.to_string()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_edits);
    let mut positions: Vec<usize> = (0..words.len()).collect();
    positions.shuffle(&mut rng);

    let mut chosen: Vec<(usize, String)> = Vec::new();
    for pos in positions {
        if chosen.len() == k {
            break;
        }
        let mut masked = words.clone();
        masked[pos] = MASK.to_string();
        if let Some(c) = first_usable(fill.suggest(&masked, pos), Some(&words[pos])) {
            chosen.push((pos, c));
        }
    }

    let edits = chosen.len();
    let mut text = example.text.clone();
    chosen.sort_by(|a, b| b.0.cmp(&a.0));
    for (pos, word) in chosen {
        text.replace_range(tokens[pos].span.clone(), &word);
    }
    Ok(build(example, text, EditOperation::Substitute, edits))
}

/// First candidate that is not punctuation-only and (when given) differs
/// from the original token ignoring case.
fn first_usable(candidates: Vec<Candidate>, original: Option<&str>) -> Option<String> {
    candidates.into_iter().map(|c| c.token).find(|t| {
        t.chars().any(char::is_alphanumeric)
            && original.map_or(true, |o| !t.eq_ignore_ascii_case(o))
    })
}

fn splice_insertions(text: &str, tokens: &[Token<'_>], mut chosen: Vec<(usize, String)>) -> String {
    let n = tokens.len();
    let mut out = text.to_string();
    chosen.sort_by(|a, b| b.0.cmp(&a.0));
    for (gap, word) in chosen {
        if gap == n {
            out.insert_str(tokens[n - 1].span.end, &format!(" {word}"));
        } else {
            out.insert_str(tokens[gap].span.start, &format!("{word} "));
        }
    }
    out
}

fn build(source: &Example, text: String, operation: EditOperation, edits: usize) -> AugmentedExample {
    AugmentedExample {
        example: Example {
            id: format!("{}-{}", source.id, short_tag(operation)),
            text,
            language: source.language,
            annotation: source.annotation,
        },
        source_id: source.id.clone(),
        operation,
        edits,
        source_language: source.language,
        skipped: edits == 0,
    }
}

fn short_tag(operation: EditOperation) -> &'static str {
    match operation {
        EditOperation::Insert => "ins",
        EditOperation::Substitute => "sub",
        EditOperation::Translate => "tr",
    }
}

/// Insertion-augment every example and substitution-augment every positive
/// one. Skips are flagged, never fatal; a non-binary corpus is an error.
pub fn augment_binary_corpus(
    corpus: &Corpus,
    fill: &(dyn ContextualFillModel + Sync),
    seed: u64,
) -> Result<AugmentedCorpus, AugmentError> {
    augment_binary_corpus_with(corpus, fill, seed, &AugmentOptions::default())
}

/// [`augment_binary_corpus`] with explicit variant counts and edit budget.
pub fn augment_binary_corpus_with(
    corpus: &Corpus,
    fill: &(dyn ContextualFillModel + Sync),
    seed: u64,
    options: &AugmentOptions,
) -> Result<AugmentedCorpus, AugmentError> {
    if options.max_edits == 0 {
        return Err(AugmentError::NoEditBudget);
    }
    if let Some(e) = corpus.iter().find(|e| e.label().is_none()) {
        return Err(AugmentError::NotBinary { id: e.id.clone() });
    }

    let jobs: Vec<(usize, &Example, EditOperation, usize)> = {
        let mut jobs = Vec::new();
        for variant in 1..=options.insert_variants {
            for (i, e) in corpus.iter().enumerate() {
                jobs.push((i, e, EditOperation::Insert, variant));
            }
        }
        for variant in 1..=options.substitute_variants {
            for (i, e) in corpus.iter().enumerate() {
                if e.label() == Some(1) {
                    jobs.push((i, e, EditOperation::Substitute, variant));
                }
            }
        }
        jobs
    };

    let items = par::map(&jobs, |&(i, e, op, variant)| {
        let op_tag = match op {
            EditOperation::Insert => 1u64,
            EditOperation::Substitute => 2,
            EditOperation::Translate => 3,
        };
        let item_seed = derive_seed(seed, &[i as u64, op_tag, variant as u64]);
        let mut item = match op {
            EditOperation::Insert => contextual_insert(e, fill, options.max_edits, item_seed),
            EditOperation::Substitute => {
                contextual_substitute(e, fill, options.max_edits, item_seed)
            }
            EditOperation::Translate => unreachable!("driver never schedules translation"),
        }?;
        if variant > 1 {
            item.example.id.push_str(&variant.to_string());
        }
        Ok::<_, AugmentError>(item)
    });

    let items = items.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(AugmentedCorpus {
        language: corpus.language,
        items,
    })
}
