//! Gendered-word lexicon: which words count as gendered, and how to swap them.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::tokenize::{is_apostrophe, stem_len, tokenize};

/// The merged default lexicon shipped with the crate.
pub const DEFAULT_LEXICON: &str = include_str!("../data/gendered_words.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Gender::Female => 'F',
            Gender::Male => 'M',
        }
    }
}

/// Result of a lexicon lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordGender {
    Gendered(Gender),
    Neutral,
}

impl WordGender {
    pub fn is_gendered(self) -> bool {
        matches!(self, WordGender::Gendered(_))
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("lexicon line {line}: '{word}' is declared both female and male in source '{source_id}'")]
    Conflict {
        line: usize,
        word: String,
        source_id: String,
    },
}

/// Word → gender map plus ordered female/male swap pairs.
///
/// Immutable once built. The swap table is derived from `swap_pairs` with a
/// first-match rule, so every pair member has exactly one opposite.
#[derive(Debug, Clone)]
pub struct GenderedLexicon {
    entries: HashMap<String, Gender>,
    swap_pairs: Vec<(String, String)>,
    source_ids: Vec<String>,
    opposite: HashMap<String, String>,
    dropped: Vec<String>,
}

const DEFAULT_SOURCE: &str = "default";

impl GenderedLexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The shipped default lexicon.
    pub fn default_lexicon() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("shipped lexicon is valid")
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut builder = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(id) = comment.trim().strip_prefix("source:") {
                    let id = id.trim();
                    if id.is_empty() {
                        return Err(parse_err(line_no, "empty source id"));
                    }
                    builder.start_source(id);
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(parse_err(line_no, format!("expected two comma-separated fields, got {}", fields.len())));
            }
            let first = check_word(line_no, fields[0])?;
            match fields[1] {
                "F" => builder.declare(line_no, first, Gender::Female)?,
                "M" => builder.declare(line_no, first, Gender::Male)?,
                other => {
                    let male = check_word(line_no, other)?;
                    if first == male {
                        return Err(parse_err(line_no, format!("'{first}' cannot pair with itself")));
                    }
                    builder.pair(line_no, first, male)?;
                }
            }
        }
        Ok(builder.finish())
    }

    pub fn gender_of(&self, token: &str) -> WordGender {
        match self.entries.get(token) {
            Some(&g) => WordGender::Gendered(g),
            None => WordGender::Neutral,
        }
    }

    /// Opposite-gender form of a normalized word, when it has one.
    pub fn opposite_of(&self, token: &str) -> Option<&str> {
        self.opposite.get(token).map(String::as_str)
    }

    /// Swap a surface word for its opposite-gender pair form.
    ///
    /// The capitalization pattern of the input is carried over, and a
    /// trailing possessive is re-attached verbatim. Words without a pair
    /// come back unchanged.
    pub fn swap(&self, word: &str) -> String {
        let stem_end = stem_len(word);
        let (stem, suffix) = word.split_at(stem_end);
        let normalized: String = stem
            .chars()
            .map(|c| if is_apostrophe(c) { '\'' } else { c })
            .flat_map(char::to_lowercase)
            .collect();
        match self.opposite.get(&normalized) {
            Some(target) => {
                let mut out = CasePattern::of(stem).apply(target);
                out.push_str(suffix);
                out
            }
            None => word.to_string(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Gender)> {
        self.entries.iter().map(|(w, &g)| (w.as_str(), g))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn swap_pairs(&self) -> &[(String, String)] {
        &self.swap_pairs
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    /// Records skipped because an earlier source gave a word the other gender.
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    /// Every word that appears in some swap pair, in file order, deduplicated.
    pub fn pair_members(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.swap_pairs
            .iter()
            .flat_map(|(f, m)| [f.as_str(), m.as_str()])
            .filter(|w| seen.insert(*w))
            .collect()
    }

    /// Pair members `w` with `opposite(opposite(w)) == w`.
    pub fn unambiguous_members(&self) -> Vec<&str> {
        self.pair_members()
            .into_iter()
            .filter(|w| {
                let there = &self.opposite[*w];
                self.opposite.get(there).map(String::as_str) == Some(*w)
            })
            .collect()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        line,
        message: message.into(),
    }
}

fn check_word(line: usize, word: &str) -> Result<String, LexiconError> {
    let seq = tokenize(word);
    if seq.tokens.len() != 1 || seq.tokens[0] != word {
        return Err(parse_err(line, format!("'{word}' is not a single normalized word")));
    }
    Ok(word.to_string())
}

#[derive(Default)]
struct Builder {
    entries: HashMap<String, Gender>,
    // gender declared within the current source, for conflict detection
    local: HashMap<String, Gender>,
    swap_pairs: Vec<(String, String)>,
    source_ids: Vec<String>,
    dropped: Vec<String>,
}

impl Builder {
    fn current_source(&self) -> &str {
        self.source_ids.last().map_or(DEFAULT_SOURCE, String::as_str)
    }

    fn start_source(&mut self, id: &str) {
        self.local.clear();
        if !self.source_ids.iter().any(|s| s == id) {
            self.source_ids.push(id.to_string());
        }
    }

    fn ensure_source(&mut self) {
        if self.source_ids.is_empty() {
            self.source_ids.push(DEFAULT_SOURCE.to_string());
        }
    }

    fn check_local(&mut self, line: usize, word: &str, gender: Gender) -> Result<(), LexiconError> {
        match self.local.get(word) {
            Some(&g) if g != gender => Err(LexiconError::Conflict {
                line,
                word: word.to_string(),
                source_id: self.current_source().to_string(),
            }),
            _ => {
                self.local.insert(word.to_string(), gender);
                Ok(())
            }
        }
    }

    /// Whether `word` may take `gender` given earlier sources.
    fn compatible(&self, word: &str, gender: Gender) -> bool {
        self.entries.get(word).is_none_or(|&g| g == gender)
    }

    fn declare(&mut self, line: usize, word: String, gender: Gender) -> Result<(), LexiconError> {
        self.ensure_source();
        self.check_local(line, &word, gender)?;
        if self.compatible(&word, gender) {
            self.entries.entry(word).or_insert(gender);
        } else {
            self.dropped.push(format!("{},{}", word, gender.letter()));
        }
        Ok(())
    }

    fn pair(&mut self, line: usize, female: String, male: String) -> Result<(), LexiconError> {
        self.ensure_source();
        self.check_local(line, &female, Gender::Female)?;
        self.check_local(line, &male, Gender::Male)?;
        if !(self.compatible(&female, Gender::Female) && self.compatible(&male, Gender::Male)) {
            self.dropped.push(format!("{female},{male}"));
            return Ok(());
        }
        self.entries.entry(female.clone()).or_insert(Gender::Female);
        self.entries.entry(male.clone()).or_insert(Gender::Male);
        let pair = (female, male);
        if !self.swap_pairs.contains(&pair) {
            self.swap_pairs.push(pair);
        }
        Ok(())
    }

    fn finish(self) -> GenderedLexicon {
        let mut opposite = HashMap::new();
        for (f, m) in &self.swap_pairs {
            opposite.entry(f.clone()).or_insert_with(|| m.clone());
            opposite.entry(m.clone()).or_insert_with(|| f.clone());
        }
        GenderedLexicon {
            entries: self.entries,
            swap_pairs: self.swap_pairs,
            source_ids: self.source_ids,
            opposite,
            dropped: self.dropped,
        }
    }
}

/// Capitalization shape of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasePattern {
    Lower,
    Title,
    Upper,
    Mixed,
}

impl CasePattern {
    pub fn of(word: &str) -> CasePattern {
        let cased: Vec<char> = word.chars().filter(|c| c.is_lowercase() || c.is_uppercase()).collect();
        let Some(&first) = cased.first() else {
            return CasePattern::Lower;
        };
        let rest_lower = cased[1..].iter().all(|c| c.is_lowercase());
        let rest_upper = cased[1..].iter().all(|c| c.is_uppercase());
        match (first.is_uppercase(), rest_lower, rest_upper) {
            (false, true, _) => CasePattern::Lower,
            // a single capital letter reads as Titlecase
            (true, true, _) => CasePattern::Title,
            (true, false, true) => CasePattern::Upper,
            _ => CasePattern::Mixed,
        }
    }

    /// Render a lowercase word in this pattern. Mixed falls back to lowercase.
    pub fn apply(self, lower: &str) -> String {
        match self {
            CasePattern::Lower | CasePattern::Mixed => lower.to_string(),
            CasePattern::Upper => lower.to_uppercase(),
            CasePattern::Title => {
                let mut chars = lower.chars();
                match chars.next() {
                    Some(c) => c.to_uppercase().chain(chars).collect(),
                    None => String::new(),
                }
            }
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gender::Female => f.write_str("female"),
            Gender::Male => f.write_str("male"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_pairs() {
        let lex = GenderedLexicon::parse("queen,king\nshe,he\n").unwrap();
        assert_eq!(lex.len(), 4);
        assert_eq!(lex.swap_pairs().len(), 2);
        assert_eq!(lex.source_ids(), ["default"]);
    }

    #[test]
    fn duplicate_across_sources_merges() {
        let text = "# source: a\nwitch,F\n# source: b\nwitch,F\n";
        let lex = GenderedLexicon::parse(text).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.gender_of("witch"), WordGender::Gendered(Gender::Female));
        assert_eq!(lex.source_ids(), ["a", "b"]);
    }

    #[test]
    fn conflict_within_source() {
        let err = GenderedLexicon::parse("# source: x\npilot,M\npilot,F\n").unwrap_err();
        match err {
            LexiconError::Conflict { line, word, source_id } => {
                assert_eq!((line, word.as_str(), source_id.as_str()), (3, "pilot", "x"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conflict_across_sources_keeps_first() {
        let lex = GenderedLexicon::parse("# source: a\npilot,M\n# source: b\npilot,F\n# source: c\npilot,hen\n").unwrap();
        assert_eq!(lex.gender_of("pilot"), WordGender::Gendered(Gender::Male));
        assert_eq!(lex.gender_of("hen"), WordGender::Neutral);
        assert_eq!(lex.dropped(), ["pilot,F", "pilot,hen"]);
        assert!(lex.swap_pairs().is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [
            ("queen,king\nbad line\n", 2),
            ("# c\nqueen,king,prince\n", 2),
            ("Queen,king\n", 1),
            ("king's,queen\n", 1),
            ("two words,F\n", 1),
            ("king,king\n", 1),
        ] {
            match GenderedLexicon::parse(text) {
                Err(LexiconError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn shipped_lookups() {
        let lex = GenderedLexicon::default_lexicon();
        assert_eq!(lex.gender_of("king"), WordGender::Gendered(Gender::Male));
        assert_eq!(lex.gender_of("grandmother"), WordGender::Gendered(Gender::Female));
        assert_eq!(lex.gender_of("tavern"), WordGender::Neutral);
        assert!(lex.dropped().is_empty());
    }

    #[test]
    fn shipped_swaps() {
        let lex = GenderedLexicon::default_lexicon();
        assert_eq!(lex.swap("grandmother"), "grandfather");
        assert_eq!(lex.swap("She"), "He");
        assert_eq!(lex.swap("king's"), "queen's");
        assert_eq!(lex.swap("KING"), "QUEEN");
        assert_eq!(lex.swap("Ma'am"), "Sir");
        assert_eq!(lex.swap("tavern"), "tavern");
        assert_eq!(lex.swap("maid"), "maid");
    }

    #[test]
    fn ambiguous_forms_follow_file_order() {
        let lex = GenderedLexicon::default_lexicon();
        assert_eq!(lex.swap("her"), "his");
        assert_eq!(lex.swap("his"), "her");
        assert_eq!(lex.swap("him"), "her");
        assert_eq!(lex.swap("hers"), "his");
        let unambiguous = lex.unambiguous_members();
        assert!(unambiguous.contains(&"her"));
        assert!(!unambiguous.contains(&"him"));
        assert!(!unambiguous.contains(&"hers"));
    }

    #[test]
    fn case_patterns() {
        assert_eq!(CasePattern::of("king"), CasePattern::Lower);
        assert_eq!(CasePattern::of("King"), CasePattern::Title);
        assert_eq!(CasePattern::of("KING"), CasePattern::Upper);
        assert_eq!(CasePattern::of("kIng"), CasePattern::Mixed);
        assert_eq!(CasePattern::of("Ma'am"), CasePattern::Title);
        assert_eq!(CasePattern::Title.apply("queen"), "Queen");
    }
}
