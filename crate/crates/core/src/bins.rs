//! Genderedness bins and control-token annotation of training examples.
//!
//! A response falls into one of four bins depending on whether it contains
//! at least one female-gendered word (F+) or none (F0), and likewise for
//! male words. The bin is rendered as a reserved control token such as
//! `<F0M+>`; the tokenizer never produces these since `<` and `>` separate
//! words.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{tokenize, DialogueCorpus};
use crate::lexicon::{Gender, GenderedLexicon, WordGender};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenderednessBin {
    pub female_present: bool,
    pub male_present: bool,
}

impl GenderednessBin {
    pub const F0M0: GenderednessBin = GenderednessBin::new(false, false);
    pub const F0M_PLUS: GenderednessBin = GenderednessBin::new(false, true);
    pub const F_PLUS_M0: GenderednessBin = GenderednessBin::new(true, false);
    pub const F_PLUS_M_PLUS: GenderednessBin = GenderednessBin::new(true, true);

    /// All four bins in table order: F0M0, F0M+, F+M0, F+M+.
    pub const ALL: [GenderednessBin; 4] = [Self::F0M0, Self::F0M_PLUS, Self::F_PLUS_M0, Self::F_PLUS_M_PLUS];

    pub const fn new(female_present: bool, male_present: bool) -> Self {
        Self {
            female_present,
            male_present,
        }
    }

    /// Position in [`GenderednessBin::ALL`].
    pub fn index(self) -> usize {
        (self.female_present as usize) * 2 + self.male_present as usize
    }

    /// Plain label, e.g. `F0M+`.
    pub fn label(self) -> &'static str {
        match (self.female_present, self.male_present) {
            (false, false) => "F0M0",
            (false, true) => "F0M+",
            (true, false) => "F+M0",
            (true, true) => "F+M+",
        }
    }

    /// Control token, e.g. `<F0M+>`.
    pub fn control_token(self) -> &'static str {
        match (self.female_present, self.male_present) {
            (false, false) => "<F0M0>",
            (false, true) => "<F0M+>",
            (true, false) => "<F+M0>",
            (true, true) => "<F+M+>",
        }
    }

    /// The bin of the gender-swapped response.
    pub fn mirrored(self) -> Self {
        Self::new(self.male_present, self.female_present)
    }
}

impl fmt::Display for GenderednessBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown genderedness bin '{0}' (expected F0M0, F0M+, F+M0 or F+M+)")]
pub struct ParseBinError(String);

impl FromStr for GenderednessBin {
    type Err = ParseBinError;

    /// Accepts the label (`F0M+`), the control token (`<F0M+>`), and `P` as
    /// a shell-friendly spelling of `+` (`F0MP`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('<').trim_end_matches('>');
        let norm = inner.to_ascii_uppercase().replace('P', "+");
        GenderednessBin::ALL
            .into_iter()
            .find(|b| b.label() == norm)
            .ok_or_else(|| ParseBinError(s.to_string()))
    }
}

impl Serialize for GenderednessBin {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for GenderednessBin {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Any function from a response to a bin can act as the control variable.
pub trait ControlFunction: Sync {
    fn classify(&self, response: &str) -> GenderednessBin;
}

/// The word-list control function: presence of lexicon hits per gender.
#[derive(Debug, Clone, Copy)]
pub struct WordListBinner<'a> {
    pub lexicon: &'a GenderedLexicon,
}

impl ControlFunction for WordListBinner<'_> {
    fn classify(&self, response: &str) -> GenderednessBin {
        classify(response, self.lexicon)
    }
}

pub fn classify(response: &str, lexicon: &GenderedLexicon) -> GenderednessBin {
    let mut bin = GenderednessBin::F0M0;
    for token in tokenize(response).tokens {
        match lexicon.gender_of(&token) {
            WordGender::Gendered(Gender::Female) => bin.female_present = true,
            WordGender::Gendered(Gender::Male) => bin.male_present = true,
            WordGender::Neutral => {}
        }
        if bin == GenderednessBin::F_PLUS_M_PLUS {
            break;
        }
    }
    bin
}

/// Separator between context segments and before the control token.
pub const CONTEXT_SEPARATOR: &str = "\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub context: String,
    pub response: String,
    pub bin: GenderednessBin,
    /// Empty when the example is not annotated.
    pub control_token: String,
}

impl TrainingExample {
    pub fn is_annotated(&self) -> bool {
        !self.control_token.is_empty()
    }

    /// Context with the control token (and its separator) removed.
    pub fn base_context(&self) -> &str {
        if self.control_token.is_empty() {
            return &self.context;
        }
        let base = self.context.strip_suffix(self.control_token.as_str()).unwrap_or(&self.context);
        base.strip_suffix(CONTEXT_SEPARATOR).unwrap_or(base)
    }

    /// Bin named by the control token, if annotated.
    pub fn control_bin(&self) -> Option<GenderednessBin> {
        self.control_token.parse().ok()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    pub annotate: bool,
    pub include_personas: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            annotate: true,
            include_personas: true,
        }
    }
}

/// One example per turn after the first, in corpus order.
pub fn extract_examples(corpus: &DialogueCorpus, lexicon: &GenderedLexicon, annotate: bool) -> Vec<TrainingExample> {
    extract_examples_with(
        corpus,
        &WordListBinner { lexicon },
        ExtractOptions {
            annotate,
            ..ExtractOptions::default()
        },
    )
}

pub fn extract_examples_with(
    corpus: &DialogueCorpus,
    control: &dyn ControlFunction,
    options: ExtractOptions,
) -> Vec<TrainingExample> {
    use rayon::prelude::*;

    corpus
        .dialogues()
        .par_iter()
        .map(|dialogue| {
            let mut history: Vec<&str> = Vec::new();
            if options.include_personas {
                history.extend(
                    dialogue
                        .characters
                        .iter()
                        .map(|c| c.persona.as_str())
                        .filter(|p| !p.trim().is_empty()),
                );
            }
            let mut out = Vec::with_capacity(dialogue.turns.len().saturating_sub(1));
            for (i, turn) in dialogue.turns.iter().enumerate() {
                if i > 0 {
                    let bin = control.classify(&turn.text);
                    let mut context = history.join(CONTEXT_SEPARATOR);
                    let control_token = if options.annotate {
                        append_token(&mut context, bin.control_token());
                        bin.control_token().to_string()
                    } else {
                        String::new()
                    };
                    out.push(TrainingExample {
                        context,
                        response: turn.text.clone(),
                        bin,
                        control_token,
                    });
                }
                history.push(&turn.text);
            }
            out
        })
        .flatten()
        .collect()
}

fn append_token(context: &mut String, token: &str) {
    if !context.is_empty() {
        context.push_str(CONTEXT_SEPARATOR);
    }
    context.push_str(token);
}

/// Replace every control token with `bin`'s; responses and true bins are kept.
pub fn force_bin(examples: &[TrainingExample], bin: GenderednessBin) -> Vec<TrainingExample> {
    examples
        .iter()
        .map(|ex| {
            let mut context = ex.base_context().to_string();
            append_token(&mut context, bin.control_token());
            TrainingExample {
                context,
                response: ex.response.clone(),
                bin: ex.bin,
                control_token: bin.control_token().to_string(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Character, Dialogue, GenderLabel, Utterance};

    fn lex() -> GenderedLexicon {
        GenderedLexicon::default_lexicon()
    }

    #[test]
    fn classify_examples() {
        let lex = lex();
        assert_eq!(classify("no, i don't remember.", &lex), GenderednessBin::F0M0);
        assert_eq!(classify("i am the queen's daughter!", &lex), GenderednessBin::F_PLUS_M0);
        assert_eq!(classify("the king met the queen", &lex), GenderednessBin::F_PLUS_M_PLUS);
        assert_eq!(classify("Yes, my lord.", &lex), GenderednessBin::F0M_PLUS);
    }

    #[test]
    fn labels_and_tokens_are_bijective() {
        let mut labels: Vec<_> = GenderednessBin::ALL.iter().map(|b| b.label()).collect();
        let mut tokens: Vec<_> = GenderednessBin::ALL.iter().map(|b| b.control_token()).collect();
        labels.dedup();
        tokens.dedup();
        assert_eq!((labels.len(), tokens.len()), (4, 4));
        for (i, b) in GenderednessBin::ALL.into_iter().enumerate() {
            assert_eq!(b.index(), i);
            assert_eq!(b.label().parse::<GenderednessBin>().unwrap(), b);
            assert_eq!(b.control_token().parse::<GenderednessBin>().unwrap(), b);
            assert!(tokenize(b.control_token()).tokens.iter().all(|t| !t.contains('<')));
        }
        assert_eq!("f0mp".parse::<GenderednessBin>().unwrap(), GenderednessBin::F0M_PLUS);
        assert!("F2M0".parse::<GenderednessBin>().is_err());
        let json = serde_json::to_string(&GenderednessBin::F_PLUS_M0).unwrap();
        assert_eq!(json, "\"F+M0\"");
    }

    fn dialogue(turns: &[&str]) -> Dialogue {
        Dialogue {
            id: "d".into(),
            characters: vec![
                Character {
                    name: "wife".into(),
                    persona: "I love my husband dearly.".into(),
                    gender_label: GenderLabel::Female,
                },
                Character {
                    name: "merchant".into(),
                    persona: "".into(),
                    gender_label: GenderLabel::Neutral,
                },
            ],
            turns: turns
                .iter()
                .enumerate()
                .map(|(i, t)| Utterance {
                    speaker_index: i % 2,
                    text: t.to_string(),
                })
                .collect(),
            split: None,
        }
    }

    #[test]
    fn three_turns_two_examples() {
        let corpus = DialogueCorpus::new(vec![dialogue(&[
            "Oh my. That is some thick dust!",
            "What a great day for more money.",
            "Ask my husband.",
        ])])
        .unwrap();
        let ex = extract_examples(&corpus, &lex(), true);
        assert_eq!(ex.len(), 2);
        assert_eq!(ex[0].bin, GenderednessBin::F0M0);
        assert_eq!(ex[0].control_token, "<F0M0>");
        assert_eq!(
            ex[0].context,
            "I love my husband dearly.\nOh my. That is some thick dust!\n<F0M0>"
        );
        assert_eq!(ex[1].bin, GenderednessBin::F0M_PLUS);
        assert!(ex[1].context.ends_with("more money.\n<F0M+>"));
        assert_eq!(ex[1].base_context(), "I love my husband dearly.\nOh my. That is some thick dust!\nWhat a great day for more money.");
    }

    #[test]
    fn unannotated_examples_match_except_token() {
        let corpus = DialogueCorpus::new(vec![dialogue(&["a", "b", "my queen"])]).unwrap();
        let annotated = extract_examples(&corpus, &lex(), true);
        let plain = extract_examples(&corpus, &lex(), false);
        assert_eq!(annotated.len(), plain.len());
        for (a, p) in annotated.iter().zip(&plain) {
            assert!(p.control_token.is_empty());
            assert_eq!(a.base_context(), p.context);
            assert_eq!((&a.response, a.bin), (&p.response, p.bin));
        }
    }

    #[test]
    fn single_turn_yields_nothing() {
        let corpus = DialogueCorpus::new(vec![dialogue(&["hello"])]).unwrap();
        assert!(extract_examples(&corpus, &lex(), true).is_empty());
    }

    #[test]
    fn forcing_changes_only_the_token() {
        let corpus = DialogueCorpus::new(vec![dialogue(&["a", "my king", "my queen", "the king and queen"])]).unwrap();
        let ex = extract_examples(&corpus, &lex(), true);
        for bin in GenderednessBin::ALL {
            let forced = force_bin(&ex, bin);
            assert_eq!(forced.len(), ex.len());
            for (f, e) in forced.iter().zip(&ex) {
                assert_eq!(f.control_token, bin.control_token());
                assert!(f.context.ends_with(bin.control_token()));
                assert_eq!(f.base_context(), e.base_context());
                assert_eq!((&f.response, f.bin), (&e.response, e.bin));
            }
        }
    }
}
