//! Counterfactual data augmentation: every dialogue that mentions a gendered
//! word gets a copy with each gendered word replaced by its pair.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, Dialogue, DialogueCorpus};
use crate::lexicon::GenderedLexicon;

pub const CDA_SUFFIX: &str = "#cda";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdaFields {
    Turns,
    Personas,
    #[default]
    Both,
}

impl CdaFields {
    fn turns(self) -> bool {
        matches!(self, CdaFields::Turns | CdaFields::Both)
    }

    fn personas(self) -> bool {
        matches!(self, CdaFields::Personas | CdaFields::Both)
    }
}

impl FromStr for CdaFields {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "turns" => Ok(CdaFields::Turns),
            "personas" => Ok(CdaFields::Personas),
            "both" => Ok(CdaFields::Both),
            other => Err(format!("unknown CDA fields '{other}' (expected turns, personas or both)")),
        }
    }
}

impl fmt::Display for CdaFields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CdaFields::Turns => "turns",
            CdaFields::Personas => "personas",
            CdaFields::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub original_id: String,
    pub augmented_id: String,
    /// Gendered tokens passed through the swap. Words without a pair count
    /// but come out unchanged.
    pub swapped_token_count: usize,
}

#[derive(Debug, Error)]
pub enum CdaError {
    #[error("augmented id '{0}' already exists in the corpus")]
    IdCollision(String),
}

/// Swap every gendered word in `text`, leaving all other bytes untouched.
/// Returns the new text and the number of gendered tokens seen.
pub fn swap_text(text: &str, lexicon: &GenderedLexicon) -> (String, usize) {
    let seq = tokenize(text);
    let mut out = String::with_capacity(text.len() + 8);
    let mut cursor = 0;
    let mut swapped = 0;
    for (token, span) in seq.iter() {
        if !lexicon.gender_of(token).is_gendered() {
            continue;
        }
        out.push_str(&text[cursor..span.start]);
        out.push_str(&lexicon.swap(&text[span.range()]));
        cursor = span.end;
        swapped += 1;
    }
    out.push_str(&text[cursor..]);
    (out, swapped)
}

/// The swapped copy of `dialogue`, or `None` when nothing in the selected
/// fields is gendered.
pub fn augment_dialogue(
    dialogue: &Dialogue,
    lexicon: &GenderedLexicon,
    fields: CdaFields,
) -> Option<(Dialogue, AugmentationRecord)> {
    let mut copy = dialogue.clone();
    let mut swapped = 0;
    if fields.turns() {
        for turn in &mut copy.turns {
            let (text, n) = swap_text(&turn.text, lexicon);
            turn.text = text;
            swapped += n;
        }
    }
    if fields.personas() {
        for c in &mut copy.characters {
            let (persona, n) = swap_text(&c.persona, lexicon);
            c.persona = persona;
            c.gender_label = c.gender_label.flipped();
            swapped += n;
        }
    }
    if swapped == 0 {
        return None;
    }
    copy.id = format!("{}{CDA_SUFFIX}", dialogue.id);
    let record = AugmentationRecord {
        original_id: dialogue.id.clone(),
        augmented_id: copy.id.clone(),
        swapped_token_count: swapped,
    };
    Some((copy, record))
}

/// Original dialogues in order, followed by the swapped copies in the same
/// order.
pub fn augment(
    corpus: &DialogueCorpus,
    lexicon: &GenderedLexicon,
    fields: CdaFields,
) -> Result<(DialogueCorpus, Vec<AugmentationRecord>), CdaError> {
    let copies: Vec<(Dialogue, AugmentationRecord)> = corpus
        .dialogues()
        .par_iter()
        .filter_map(|d| augment_dialogue(d, lexicon, fields))
        .collect();
    let ids: HashSet<&str> = corpus.iter().map(|d| d.id.as_str()).collect();
    if let Some((d, _)) = copies.iter().find(|(d, _)| ids.contains(d.id.as_str())) {
        return Err(CdaError::IdCollision(d.id.clone()));
    }
    let mut dialogues = corpus.dialogues().to_vec();
    let mut records = Vec::with_capacity(copies.len());
    for (d, r) in copies {
        dialogues.push(d);
        records.push(r);
    }
    let out = DialogueCorpus::new(dialogues).expect("swapping preserves validity and ids are unique");
    Ok((out, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Character, GenderLabel, Utterance};

    fn dialogue(id: &str, persona: &str, turns: &[&str]) -> Dialogue {
        Dialogue {
            id: id.into(),
            characters: vec![Character {
                name: "wife".into(),
                persona: persona.into(),
                gender_label: GenderLabel::Female,
            }],
            turns: turns
                .iter()
                .map(|t| Utterance {
                    speaker_index: 0,
                    text: t.to_string(),
                })
                .collect(),
            split: None,
        }
    }

    #[test]
    fn grandmother_becomes_grandfather() {
        let lex = GenderedLexicon::default_lexicon();
        let (text, n) = swap_text("my grandmother is kind", &lex);
        assert_eq!((text.as_str(), n), ("my grandfather is kind", 1));
        let (text, _) = swap_text("I am the King's chief wife -- HER majesty!", &lex);
        assert_eq!(text, "I am the Queen's chief husband -- HIS majesty!");
    }

    #[test]
    fn neutral_dialogues_are_not_copied() {
        let lex = GenderedLexicon::default_lexicon();
        let corpus = DialogueCorpus::new(vec![
            dialogue("a", "I sell bread.", &["What a great day for more money."]),
            dialogue("b", "I sell bread.", &["Yes, my lord."]),
        ])
        .unwrap();
        let (out, records) = augment(&corpus, &lex, CdaFields::Both).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].augmented_id, "b#cda");
        let copy = &out.dialogues()[2];
        assert_eq!(copy.turns[0].text, "Yes, my lady.");
        assert_eq!(copy.characters[0].gender_label, GenderLabel::Male);
        assert_eq!(out.dialogues()[..2], corpus.dialogues()[..]);
    }

    #[test]
    fn field_selection() {
        let lex = GenderedLexicon::default_lexicon();
        let corpus = DialogueCorpus::new(vec![dialogue("a", "I love my husband.", &["Hello there."])]).unwrap();
        let (out, _) = augment(&corpus, &lex, CdaFields::Turns).unwrap();
        assert_eq!(out.len(), 1);
        let (out, rec) = augment(&corpus, &lex, CdaFields::Personas).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out.dialogues()[1].characters[0].persona, "I love my wife.");
        assert_eq!(rec[0].swapped_token_count, 1);
    }

    #[test]
    fn all_gendered_doubles() {
        let lex = GenderedLexicon::default_lexicon();
        let corpus = DialogueCorpus::new(vec![
            dialogue("a", "", &["she left"]),
            dialogue("b", "", &["he left"]),
        ])
        .unwrap();
        let (out, _) = augment(&corpus, &lex, CdaFields::Both).unwrap();
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn id_collision() {
        let lex = GenderedLexicon::default_lexicon();
        let corpus = DialogueCorpus::new(vec![dialogue("a", "", &["she"]), dialogue("a#cda", "", &["rain"])]).unwrap();
        assert!(matches!(augment(&corpus, &lex, CdaFields::Both), Err(CdaError::IdCollision(id)) if id == "a#cda"));
    }

    #[test]
    fn unpaired_words_are_counted_but_kept() {
        let lex = GenderedLexicon::default_lexicon();
        let (text, n) = swap_text("the maid", &lex);
        assert_eq!((text.as_str(), n), ("the maid", 1));
    }
}
