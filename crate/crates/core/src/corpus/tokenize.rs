//! Word tokenization shared by counting, binning, augmentation and scoring.
//!
//! A word is a maximal run of alphanumeric characters. An apostrophe (`'` or
//! `’`) joins two words only when it sits between alphanumerics, so
//! `don't` stays whole while `'tis` and `kings'` lose their apostrophes.
//! Normalization lowercases the word, canonicalizes the apostrophe to `'`
//! and strips a trailing possessive `'s`.

use std::ops::Range;

/// Byte offsets of one token inside the text it was cut from.
///
/// `start..end` covers the whole word including any possessive suffix;
/// `start..stem_end` is the part that was normalized into the token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub stem_end: usize,
    pub end: usize,
}

impl Span {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn stem(&self) -> Range<usize> {
        self.start..self.stem_end
    }

    pub fn has_possessive(&self) -> bool {
        self.stem_end < self.end
    }
}

/// Normalized tokens aligned 1:1 with their surface spans.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub surface: Vec<Span>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Original text of token `i`, possessive included.
    pub fn surface_text<'a>(&self, text: &'a str, i: usize) -> &'a str {
        &text[self.surface[i].range()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Span)> {
        self.tokens.iter().map(String::as_str).zip(self.surface.iter())
    }
}

pub(crate) fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Tokenize `text` into normalized words.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut seq = TokenSequence::default();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if is_apostrophe(c) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        let word = &text[start..end];
        let stem_len = stem_len(word);
        seq.tokens.push(normalize(word));
        seq.surface.push(Span {
            start,
            stem_end: start + stem_len,
            end,
        });
        i = j;
    }
    seq
}

/// Byte length of `word` once every trailing possessive `'s` is removed.
pub(crate) fn stem_len(word: &str) -> usize {
    let mut stem = word;
    loop {
        let mut rev = stem.char_indices().rev();
        match (rev.next(), rev.next()) {
            (Some((_, s)), Some((idx, ap))) if (s == 's' || s == 'S') && is_apostrophe(ap) && idx > 0 => {
                stem = &stem[..idx];
            }
            _ => return stem.len(),
        }
    }
}

/// Normalize a single word: lowercase, canonical apostrophe, no possessive.
///
/// Idempotent: `normalize(&normalize(w)) == normalize(w)`.
pub fn normalize(word: &str) -> String {
    let lowered: String = word
        .chars()
        .map(|c| if is_apostrophe(c) { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect();
    let keep = stem_len(&lowered);
    lowered[..keep].to_string()
}
