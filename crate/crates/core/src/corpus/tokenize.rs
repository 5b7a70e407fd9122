//! Whitespace tokenizer with punctuation trimming and byte spans.
//!
//! Splits on whitespace, then strips leading/trailing non-alphanumeric
//! characters from each piece. Spans are half-open byte ranges into the
//! original text and always delimit the trimmed core, so original casing
//! and punctuation stay recoverable. Document-frequency lookups case-fold
//! with [`fold`]; the spans themselves never do.

use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub span: Range<usize>,
}

/// Case-fold a token for indexing.
pub fn fold(token: &str) -> String {
    token.to_lowercase()
}

/// Tokenize `text` into punctuation-trimmed tokens with byte spans.
///
/// Pieces that are punctuation-only disappear; `"--"` yields nothing.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                push_trimmed(text, s, i, &mut tokens);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        push_trimmed(text, s, text.len(), &mut tokens);
    }
    tokens
}

fn push_trimmed<'a>(text: &'a str, start: usize, end: usize, out: &mut Vec<Token<'a>>) {
    let piece = &text[start..end];
    let not_word = |c: char| !c.is_alphanumeric();
    let head = piece.trim_start_matches(not_word);
    let trimmed = head.trim_end_matches(not_word);
    if trimmed.is_empty() {
        return;
    }
    let s = start + (piece.len() - head.len());
    out.push(Token {
        text: trimmed,
        span: s..s + trimmed.len(),
    });
}

/// Case-folded token set of a sentence, for document-frequency counting.
pub fn token_set(text: &str) -> std::collections::BTreeSet<String> {
    tokenize(text).iter().map(|t| fold(t.text)).collect()
}
