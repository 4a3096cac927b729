//! Tweet preprocessing: collection filters, mention anonymization,
//! tokenization and n-gram extraction.

use std::collections::HashMap;

/// Separator placed between the tokens of an n-gram. The tokenizer treats it
/// as whitespace, so it can never occur inside a token.
pub const NGRAM_SEP: char = '\u{2581}';

pub const MENTION: &str = "@USER";

/// Minimum length, in unicode scalar values, of a kept text.
pub const MIN_CHARS: usize = 18;

/// Minimum number of whitespace-separated words of a kept text.
pub const MIN_WORDS: usize = 2;

const URL_MARKERS: [&str; 3] = ["http://", "https://", "www."];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    TooShort,
    TooFewWords,
    Url,
}

impl DropReason {
    pub const ALL: [DropReason; 3] = [DropReason::TooShort, DropReason::TooFewWords, DropReason::Url];

    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::TooShort => "too_short",
            DropReason::TooFewWords => "too_few_words",
            DropReason::Url => "url",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Drop(DropReason),
}

impl FilterDecision {
    pub fn is_keep(self) -> bool {
        matches!(self, FilterDecision::Keep)
    }
}

/// Collection-stage filter. Rules are checked in order and the first failing
/// one is reported.
pub fn filter_raw(text: &str) -> FilterDecision {
    if text.chars().count() < MIN_CHARS {
        FilterDecision::Drop(DropReason::TooShort)
    } else if text.split_whitespace().count() < MIN_WORDS {
        FilterDecision::Drop(DropReason::TooFewWords)
    } else if URL_MARKERS.iter().any(|m| text.contains(m)) {
        FilterDecision::Drop(DropReason::Url)
    } else {
        FilterDecision::Keep
    }
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Replaces every user mention with `@USER`.
///
/// A mention is `@` followed by at least one handle character, where the `@`
/// is not itself preceded by a handle character (so `a@b` is left alone).
pub fn anonymize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let starts_mention = c == '@'
            && !prev.is_some_and(is_handle_char)
            && chars.peek().is_some_and(|&n| is_handle_char(n));
        if starts_mention {
            let mut last = c;
            while let Some(&n) = chars.peek() {
                if !is_handle_char(n) {
                    break;
                }
                last = n;
                chars.next();
            }
            out.push_str(MENTION);
            prev = Some(last);
        } else {
            out.push(c);
            prev = Some(c);
        }
    }
    out
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{2026}' | '\u{2013}' | '\u{2014}'
                | '\u{00AB}' | '\u{00BB}' | '\u{00A1}' | '\u{00BF}'
        )
}

/// Punctuation kept inside a word when flanked by alphanumerics
/// (`don't`, `f*ck`).
fn is_word_internal(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '*')
}

/// Lowercases and splits `text` into word and punctuation tokens.
///
/// Every punctuation character becomes its own token, except apostrophes and
/// asterisks between two alphanumerics. `@USER` is kept as one token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split(|c: char| c.is_whitespace() || c == NGRAM_SEP) {
        if !chunk.is_empty() {
            tokenize_chunk(chunk, &mut tokens);
        }
    }
    tokens
}

fn tokenize_chunk(chunk: &str, tokens: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mention: Vec<char> = MENTION.chars().collect();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '@'
            && (i == 0 || !is_handle_char(chars[i - 1]))
            && chars[i..].starts_with(&mention)
            && chars.get(i + mention.len()).is_none_or(|&n| !is_handle_char(n))
        {
            flush(&mut word, tokens);
            tokens.push(MENTION.to_string());
            i += mention.len();
            continue;
        }
        if is_punct(c) {
            let internal = is_word_internal(c)
                && word.chars().last().is_some_and(char::is_alphanumeric)
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if internal {
                word.push(c);
            } else {
                flush(&mut word, tokens);
                tokens.push(c.to_string());
            }
        } else {
            word.extend(c.to_lowercase());
        }
        i += 1;
    }
    flush(&mut word, tokens);
}

fn flush(word: &mut String, tokens: &mut Vec<String>) {
    if !word.is_empty() {
        tokens.push(std::mem::take(word));
    }
}

/// Contiguous n-grams of every requested order, joined with [`NGRAM_SEP`].
/// Duplicates are kept, so the result is a multiset.
pub fn extract_ngrams<S: AsRef<str>>(tokens: &[S], orders: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    let mut sep = [0u8; 4];
    let sep: &str = NGRAM_SEP.encode_utf8(&mut sep);
    for &n in orders {
        if n == 0 || n > tokens.len() {
            continue;
        }
        for window in tokens.windows(n) {
            let mut gram = String::from(window[0].as_ref());
            for t in &window[1..] {
                gram.push_str(sep);
                gram.push_str(t.as_ref());
            }
            out.push(gram);
        }
    }
    out
}

pub fn ngram_counts<S: AsRef<str>>(tokens: &[S], orders: &[usize]) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for gram in extract_ngrams(tokens, orders) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}
