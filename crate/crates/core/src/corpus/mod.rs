//! Persona-grounded dialogue data model and its line-delimited JSON format.
//!
//! One dialogue per line:
//!
//! ```text
//! {"id": "d1", "characters": [{"name": "wife", "persona": "...", "gender_label": "F"}],
//!  "turns": [{"speaker_index": 0, "text": "..."}], "split": "train"}
//! ```
//!
//! `split` is optional and only used for filtering.

pub mod tokenize;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tokenize::{normalize, tokenize, Span, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderLabel {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
    /// Annotated, but the persona does not make a gender explicit.
    #[serde(rename = "N")]
    Neutral,
    /// Not annotated.
    #[serde(rename = "U")]
    Unknown,
}

impl GenderLabel {
    /// F and M trade places; N and U are fixed.
    pub fn flipped(self) -> GenderLabel {
        match self {
            GenderLabel::Female => GenderLabel::Male,
            GenderLabel::Male => GenderLabel::Female,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    pub name: String,
    pub persona: String,
    pub gender_label: GenderLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker_index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub characters: Vec<Character>,
    pub turns: Vec<Utterance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

impl Dialogue {
    pub fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("dialogue id is empty".into());
        }
        if self.characters.is_empty() {
            return Err(format!("dialogue '{}' has no characters", self.id));
        }
        for (i, c) in self.characters.iter().enumerate() {
            if c.name.trim().is_empty() {
                return Err(format!("dialogue '{}': character {i} has an empty name", self.id));
            }
        }
        for (i, t) in self.turns.iter().enumerate() {
            if t.speaker_index >= self.characters.len() {
                return Err(format!(
                    "dialogue '{}': turn {i} has speaker_index {} but only {} characters",
                    self.id,
                    t.speaker_index,
                    self.characters.len()
                ));
            }
            if t.text.trim().is_empty() {
                return Err(format!("dialogue '{}': turn {i} has empty text", self.id));
            }
        }
        Ok(())
    }

    /// Number of tokens across turn texts.
    pub fn turn_token_count(&self) -> usize {
        self.turns.iter().map(|t| tokenize(&t.text).len()).sum()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: invalid JSON: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: duplicate dialogue id '{id}'")]
    DuplicateId { line: usize, id: String },
}

/// An ordered, validated set of dialogues with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DialogueCorpus {
    dialogues: Vec<Dialogue>,
}

impl DialogueCorpus {
    /// Build a corpus, validating every dialogue. Line numbers in errors are
    /// 1-based positions in `dialogues`.
    pub fn new(dialogues: Vec<Dialogue>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, d) in dialogues.iter().enumerate() {
            d.validate().map_err(|message| CorpusError::Schema { line: i + 1, message })?;
            if !seen.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    line: i + 1,
                    id: d.id.clone(),
                });
            }
        }
        Ok(Self { dialogues })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = File::open(path).map_err(io_err)?;
        Self::read(BufReader::new(file)).map_err(|e| match e {
            CorpusError::Io { source, .. } => io_err(source),
            other => other,
        })
    }

    /// Parse JSONL from any reader. Blank lines are skipped.
    pub fn read(reader: impl BufRead) -> Result<Self, CorpusError> {
        let mut dialogues = Vec::new();
        let mut seen = HashSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|source| CorpusError::Io {
                path: "<reader>".into(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let dialogue: Dialogue =
                serde_json::from_str(&line).map_err(|source| CorpusError::Parse { line: line_no, source })?;
            dialogue
                .validate()
                .map_err(|message| CorpusError::Schema { line: line_no, message })?;
            if !seen.insert(dialogue.id.clone()) {
                return Err(CorpusError::DuplicateId {
                    line: line_no,
                    id: dialogue.id,
                });
            }
            dialogues.push(dialogue);
        }
        Ok(Self { dialogues })
    }

    pub fn parse_str(text: &str) -> Result<Self, CorpusError> {
        Self::read(text.as_bytes())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        for d in &self.dialogues {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn dialogues(&self) -> &[Dialogue] {
        &self.dialogues
    }

    pub fn into_dialogues(self) -> Vec<Dialogue> {
        self.dialogues
    }

    pub fn len(&self) -> usize {
        self.dialogues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Dialogue> {
        self.dialogues.iter()
    }

    /// Dialogues whose split tag equals `split`.
    pub fn filter_split(&self, split: &str) -> DialogueCorpus {
        DialogueCorpus {
            dialogues: self
                .dialogues
                .iter()
                .filter(|d| d.split.as_deref() == Some(split))
                .cloned()
                .collect(),
        }
    }

    pub fn turn_token_count(&self) -> usize {
        self.dialogues.iter().map(Dialogue::turn_token_count).sum()
    }

    pub fn turn_count(&self) -> usize {
        self.dialogues.iter().map(|d| d.turns.len()).sum()
    }
}

impl<'a> IntoIterator for &'a DialogueCorpus {
    type Item = &'a Dialogue;
    type IntoIter = std::slice::Iter<'a, Dialogue>;

    fn into_iter(self) -> Self::IntoIter {
        self.dialogues.iter()
    }
}
