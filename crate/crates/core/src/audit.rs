//! Corpus bias measurements: gendered-word share, male bias, character
//! census, gendered references in personas, and genderedness-bin
//! distribution.
//!
//! Everything is built from integer counts that add across dialogues, so a
//! report over a corpus equals the merge of reports over any partition of
//! it. Percentages are recomputed from the merged counts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bins::{classify, GenderednessBin};
use crate::corpus::{normalize, tokenize, Dialogue, DialogueCorpus, GenderLabel};
use crate::lexicon::{Gender, GenderedLexicon, WordGender};

pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("no responses to bin: the corpus has no turns")]
    NoResponses,
}

/// Token-level gender counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCounts {
    pub total_tokens: u64,
    pub female_tokens: u64,
    pub male_tokens: u64,
}

impl WordCounts {
    pub fn of_text(text: &str, lexicon: &GenderedLexicon) -> Self {
        let mut counts = WordCounts::default();
        counts.add_text(text, lexicon);
        counts
    }

    pub fn add_text(&mut self, text: &str, lexicon: &GenderedLexicon) {
        for token in tokenize(text).tokens {
            self.total_tokens += 1;
            match lexicon.gender_of(&token) {
                WordGender::Gendered(Gender::Female) => self.female_tokens += 1,
                WordGender::Gendered(Gender::Male) => self.male_tokens += 1,
                WordGender::Neutral => {}
            }
        }
    }

    pub fn merge(&mut self, other: &WordCounts) {
        self.total_tokens += other.total_tokens;
        self.female_tokens += other.female_tokens;
        self.male_tokens += other.male_tokens;
    }

    pub fn gendered_tokens(&self) -> u64 {
        self.female_tokens + self.male_tokens
    }

    /// `None` when there are no tokens at all.
    pub fn pct_gendered_words(&self) -> Option<f64> {
        (self.total_tokens > 0).then(|| 100.0 * self.gendered_tokens() as f64 / self.total_tokens as f64)
    }

    /// `None` (ABSENT) when there are no gendered tokens.
    pub fn pct_male_bias(&self) -> Option<f64> {
        let gendered = self.gendered_tokens();
        (gendered > 0).then(|| 100.0 * self.male_tokens as f64 / gendered as f64)
    }

    pub fn pct_female_bias(&self) -> Option<f64> {
        let gendered = self.gendered_tokens();
        (gendered > 0).then(|| 100.0 * self.female_tokens as f64 / gendered as f64)
    }
}

/// Characters by annotated gender label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub female: u64,
    pub male: u64,
    pub neutral: u64,
    pub unknown: u64,
}

impl Census {
    pub fn add(&mut self, label: GenderLabel) {
        match label {
            GenderLabel::Female => self.female += 1,
            GenderLabel::Male => self.male += 1,
            GenderLabel::Neutral => self.neutral += 1,
            GenderLabel::Unknown => self.unknown += 1,
        }
    }

    pub fn merge(&mut self, other: &Census) {
        self.female += other.female;
        self.male += other.male;
        self.neutral += other.neutral;
        self.unknown += other.unknown;
    }

    pub fn total(&self) -> u64 {
        self.female + self.male + self.neutral + self.unknown
    }
}

/// Female vs male lexicon hits in persona texts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCounts {
    pub female: u64,
    pub male: u64,
}

/// Responses per genderedness bin, indexed as [`GenderednessBin::ALL`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCounts(pub [u64; 4]);

impl BinCounts {
    pub fn add(&mut self, bin: GenderednessBin) {
        self.0[bin.index()] += 1;
    }

    pub fn merge(&mut self, other: &BinCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn get(&self, bin: GenderednessBin) -> u64 {
        self.0[bin.index()]
    }

    pub fn distribution(&self) -> Option<BTreeMap<GenderednessBin, f64>> {
        let total = self.total();
        (total > 0).then(|| {
            GenderednessBin::ALL
                .into_iter()
                .map(|b| (b, 100.0 * self.get(b) as f64 / total as f64))
                .collect()
        })
    }
}

/// Counts plus the percentages derived from them.
///
/// `pct_*` fields are `None` when their denominator is zero and serialize as
/// JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub total_tokens: u64,
    pub female_tokens: u64,
    pub male_tokens: u64,
    pub pct_gendered_words: Option<f64>,
    pub pct_male_bias: Option<f64>,
    pub census: Census,
    pub persona_references: ReferenceCounts,
    pub bin_counts: BinCounts,
    pub bin_distribution: Option<BTreeMap<GenderednessBin, f64>>,
}

impl Default for BiasReport {
    fn default() -> Self {
        Self::from_parts(WordCounts::default(), Census::default(), ReferenceCounts::default(), BinCounts::default())
    }
}

impl BiasReport {
    pub fn from_parts(words: WordCounts, census: Census, refs: ReferenceCounts, bins: BinCounts) -> Self {
        Self {
            total_tokens: words.total_tokens,
            female_tokens: words.female_tokens,
            male_tokens: words.male_tokens,
            pct_gendered_words: words.pct_gendered_words(),
            pct_male_bias: words.pct_male_bias(),
            census,
            persona_references: refs,
            bin_counts: bins,
            bin_distribution: bins.distribution(),
        }
    }

    pub fn word_counts(&self) -> WordCounts {
        WordCounts {
            total_tokens: self.total_tokens,
            female_tokens: self.female_tokens,
            male_tokens: self.male_tokens,
        }
    }

    /// Add counts and recompute percentages.
    pub fn merge(&self, other: &BiasReport) -> BiasReport {
        let mut words = self.word_counts();
        words.merge(&other.word_counts());
        let mut census = self.census;
        census.merge(&other.census);
        let refs = ReferenceCounts {
            female: self.persona_references.female + other.persona_references.female,
            male: self.persona_references.male + other.persona_references.male,
        };
        let mut bins = self.bin_counts;
        bins.merge(&other.bin_counts);
        BiasReport::from_parts(words, census, refs, bins)
    }
}

/// Which parts of a dialogue a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditScope {
    /// Turn texts and their bins.
    Utterances,
    /// Persona texts, character census and persona references.
    Personas,
    /// Turn-text word counts and bins together with census and persona references.
    Full,
}

pub fn audit_dialogue(dialogue: &Dialogue, lexicon: &GenderedLexicon, scope: AuditScope) -> BiasReport {
    let mut words = WordCounts::default();
    let mut census = Census::default();
    let mut refs = ReferenceCounts::default();
    let mut bins = BinCounts::default();
    if matches!(scope, AuditScope::Utterances | AuditScope::Full) {
        for turn in &dialogue.turns {
            words.add_text(&turn.text, lexicon);
            bins.add(classify(&turn.text, lexicon));
        }
    }
    if matches!(scope, AuditScope::Personas | AuditScope::Full) {
        let mut persona_words = WordCounts::default();
        for c in &dialogue.characters {
            census.add(c.gender_label);
            persona_words.add_text(&c.persona, lexicon);
        }
        refs = ReferenceCounts {
            female: persona_words.female_tokens,
            male: persona_words.male_tokens,
        };
        if scope == AuditScope::Personas {
            words = persona_words;
        }
    }
    BiasReport::from_parts(words, census, refs, bins)
}

/// Audit every dialogue in parallel and merge. The merge is over integer
/// counts, so the result does not depend on scheduling.
pub fn audit(corpus: &DialogueCorpus, lexicon: &GenderedLexicon, scope: AuditScope) -> BiasReport {
    corpus
        .dialogues()
        .par_iter()
        .map(|d| audit_dialogue(d, lexicon, scope))
        .reduce(BiasReport::default, |a, b| a.merge(&b))
}

/// Word counts and bins over all turn texts.
pub fn audit_utterances(corpus: &DialogueCorpus, lexicon: &GenderedLexicon) -> BiasReport {
    audit(corpus, lexicon, AuditScope::Utterances)
}

/// Word counts over persona texts, plus census and persona references.
pub fn audit_personas(corpus: &DialogueCorpus, lexicon: &GenderedLexicon) -> BiasReport {
    audit(corpus, lexicon, AuditScope::Personas)
}

/// Percentage of turns in each bin; every turn counts as a response.
pub fn bin_distribution(
    corpus: &DialogueCorpus,
    lexicon: &GenderedLexicon,
) -> Result<BTreeMap<GenderednessBin, f64>, AuditError> {
    audit_utterances(corpus, lexicon)
        .bin_distribution
        .ok_or(AuditError::NoResponses)
}

/// Normalized stopword set.
#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn default_english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(normalize)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

impl FromIterator<String> for Stopwords {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(|w| normalize(&w)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopWord {
    pub word: String,
    pub count: u64,
    /// Lexicon gender, if any; rendered with a `*` in reports.
    pub gender: Option<Gender>,
}

/// The `k` most frequent non-stopword tokens, by count descending then word.
pub fn top_words<S: AsRef<str>>(
    utterances: &[S],
    stopwords: &Stopwords,
    k: usize,
    lexicon: &GenderedLexicon,
) -> Vec<TopWord> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for u in utterances {
        for token in tokenize(u.as_ref()).tokens {
            if !stopwords.contains(&token) {
                *counts.entry(token).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(word, count)| {
            let gender = match lexicon.gender_of(&word) {
                WordGender::Gendered(g) => Some(g),
                WordGender::Neutral => None,
            };
            TopWord { word, count, gender }
        })
        .collect()
}

/// Rendering helpers shared by the audit and evaluation reports.
pub mod render {
    use super::*;

    /// Two-decimal rendering; ABSENT prints as `0` to follow the usual table
    /// convention.
    pub fn pct(value: Option<f64>) -> String {
        match value {
            Some(v) => format!("{v:.2}"),
            None => "0".to_string(),
        }
    }

    pub fn top_words_line(words: &[TopWord]) -> String {
        words
            .iter()
            .map(|w| if w.gender.is_some() { format!("{}*", w.word) } else { w.word.clone() })
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Markdown tables for one or more named reports: word counts, census
    /// and references, and bin distribution.
    pub fn markdown(rows: &[(&str, &BiasReport)]) -> String {
        let mut out = String::new();
        out.push_str("### Gendered word counts\n\n");
        out.push_str("| Dataset | % gend. words | % male bias |\n|---|---:|---:|\n");
        for (name, r) in rows {
            out.push_str(&format!("| {name} | {} | {} |\n", pct(r.pct_gendered_words), pct(r.pct_male_bias)));
        }
        out.push_str("\n### Characters and persona references\n\n");
        out.push_str("| Dataset | # Char F | # Char M | # Char N | # Char U | # Char All | # Ref F | # Ref M |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
        for (name, r) in rows {
            let c = r.census;
            out.push_str(&format!(
                "| {name} | {} | {} | {} | {} | {} | {} | {} |\n",
                c.female,
                c.male,
                c.neutral,
                c.unknown,
                c.total(),
                r.persona_references.female,
                r.persona_references.male
            ));
        }
        out.push_str("\n### Genderedness bins (% of responses)\n\n");
        out.push_str("| Dataset | F0M0 | F0M+ | F+M0 | F+M+ |\n|---|---:|---:|---:|---:|\n");
        for (name, r) in rows {
            let cells: Vec<String> = GenderednessBin::ALL
                .iter()
                .map(|b| pct(r.bin_distribution.as_ref().map(|d| d[b])))
                .collect();
            out.push_str(&format!("| {name} | {} |\n", cells.join(" | ")));
        }
        out
    }
}

/// Token-level statistics that explain why counts may differ from another
/// tool's: how often the rules that are specific to this tokenizer fired.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenizationDiagnostic {
    pub tokens: u64,
    pub whitespace_tokens: u64,
    pub possessives_stripped: u64,
    pub tokens_with_apostrophe: u64,
    pub hyphen_splits: u64,
    pub non_ascii_tokens: u64,
    /// Gendered-word share if tokens were whitespace-split and stripped of
    /// edge punctuation instead.
    pub whitespace_pct_gendered_words: Option<f64>,
    pub whitespace_pct_male_bias: Option<f64>,
}

pub fn tokenization_diagnostic(corpus: &DialogueCorpus, lexicon: &GenderedLexicon) -> TokenizationDiagnostic {
    let mut diag = TokenizationDiagnostic::default();
    let mut alt = WordCounts::default();
    for d in corpus {
        for t in &d.turns {
            let seq = tokenize(&t.text);
            diag.tokens += seq.len() as u64;
            for (tok, span) in seq.iter() {
                diag.possessives_stripped += span.has_possessive() as u64;
                diag.tokens_with_apostrophe += tok.contains('\'') as u64;
                diag.non_ascii_tokens += (!tok.is_ascii()) as u64;
            }
            for raw in t.text.split_whitespace() {
                diag.whitespace_tokens += 1;
                diag.hyphen_splits += raw.matches('-').count() as u64;
                let word = raw.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
                if word.is_empty() {
                    continue;
                }
                alt.total_tokens += 1;
                match lexicon.gender_of(&word) {
                    WordGender::Gendered(Gender::Female) => alt.female_tokens += 1,
                    WordGender::Gendered(Gender::Male) => alt.male_tokens += 1,
                    WordGender::Neutral => {}
                }
            }
        }
    }
    diag.whitespace_pct_gendered_words = alt.pct_gendered_words();
    diag.whitespace_pct_male_bias = alt.pct_male_bias();
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Character, Utterance};

    fn corpus(turns: &[&str], labels: &[(GenderLabel, &str)]) -> DialogueCorpus {
        let d = Dialogue {
            id: "d".into(),
            characters: labels
                .iter()
                .map(|(l, p)| Character {
                    name: "c".into(),
                    persona: p.to_string(),
                    gender_label: *l,
                })
                .collect(),
            turns: turns
                .iter()
                .map(|t| Utterance {
                    speaker_index: 0,
                    text: t.to_string(),
                })
                .collect(),
            split: None,
        };
        DialogueCorpus::new(vec![d]).unwrap()
    }

    #[test]
    fn king_and_queen() {
        let lex = GenderedLexicon::default_lexicon();
        let r = audit_utterances(&corpus(&["the king and the queen"], &[(GenderLabel::Unknown, "")]), &lex);
        assert_eq!((r.total_tokens, r.female_tokens, r.male_tokens), (5, 1, 1));
        assert_eq!(r.pct_gendered_words, Some(40.0));
        assert_eq!(r.pct_male_bias, Some(50.0));
    }

    #[test]
    fn no_gendered_tokens_means_absent_bias() {
        let lex = GenderedLexicon::default_lexicon();
        let r = audit_utterances(&corpus(&["what a great day"], &[(GenderLabel::Unknown, "")]), &lex);
        assert_eq!(r.pct_gendered_words, Some(0.0));
        assert_eq!(r.pct_male_bias, None);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["pct_male_bias"].is_null());
    }

    #[test]
    fn empty_corpus() {
        let lex = GenderedLexicon::default_lexicon();
        let r = audit_utterances(&DialogueCorpus::default(), &lex);
        assert_eq!(r.total_tokens, 0);
        assert_eq!((r.pct_gendered_words, r.pct_male_bias), (None, None));
        assert!(matches!(bin_distribution(&DialogueCorpus::default(), &lex), Err(AuditError::NoResponses)));
    }

    #[test]
    fn persona_census_and_references() {
        let lex = GenderedLexicon::default_lexicon();
        let r = audit_personas(&corpus(&["hi"], &[(GenderLabel::Female, "I serve my father")]), &lex);
        assert_eq!(r.census, Census { female: 1, ..Census::default() });
        assert_eq!(r.persona_references, ReferenceCounts { female: 0, male: 1 });

        let r = audit_personas(
            &corpus(&["hi"], &[(GenderLabel::Unknown, "my queen"), (GenderLabel::Unknown, "a sword")]),
            &lex,
        );
        assert_eq!(r.census.unknown, 2);
        assert_eq!(r.persona_references, ReferenceCounts { female: 1, male: 0 });
    }

    #[test]
    fn bins_uniform_and_neutral() {
        let lex = GenderedLexicon::default_lexicon();
        let c = corpus(&["a sword", "my lord", "my lady", "the lord and lady"], &[(GenderLabel::Unknown, "")]);
        let dist = bin_distribution(&c, &lex).unwrap();
        assert!(dist.values().all(|&p| p == 25.0));
        let c = corpus(&["a sword", "a shield"], &[(GenderLabel::Unknown, "")]);
        let dist = bin_distribution(&c, &lex).unwrap();
        assert_eq!(dist[&GenderednessBin::F0M0], 100.0);
        assert_eq!(dist.values().sum::<f64>(), 100.0);
    }

    #[test]
    fn top_words_counts_and_ties() {
        let lex = GenderedLexicon::default_lexicon();
        let stop: Stopwords = ["the".to_string()].into_iter().collect();
        let top = top_words(&["the king the king the queen"], &stop, 2, &lex);
        assert_eq!(
            top.iter().map(|w| (w.word.as_str(), w.count)).collect::<Vec<_>>(),
            [("king", 2), ("queen", 1)]
        );
        assert_eq!(top[1].gender, Some(Gender::Female));

        let top = top_words(&["sorry hear", "sorry hear"], &stop, 5, &lex);
        assert_eq!(top[0].word, "hear");
        assert_eq!(top[1].word, "sorry");
        assert_eq!(top.len(), 2);
        assert_eq!(render::top_words_line(&top_words(&["the queen rests"], &stop, 5, &lex)), "queen*, rests");
    }

    #[test]
    fn shipped_stopwords_normalized() {
        let stop = Stopwords::default_english();
        assert!(stop.contains("the"));
        assert!(!stop.contains("she"));
        assert!(!stop.contains("his"));
    }

    #[test]
    fn markdown_renders_absent_as_zero() {
        let lex = GenderedLexicon::default_lexicon();
        let r = audit(&corpus(&["a sword"], &[(GenderLabel::Male, "")]), &lex, AuditScope::Full);
        let md = render::markdown(&[("toy", &r)]);
        assert!(md.contains("| toy | 0.00 | 0 |"), "{md}");
        assert!(md.contains("| toy | 100.00 | 0.00 | 0.00 | 0.00 |"), "{md}");
    }
}
