//! Seeded generator for the bundled fantasy dialogue corpus.
//!
//! Each turn is drawn for a target genderedness bin (roughly 60 / 27 / 8 / 5
//! percent for F0M0 / F0M+ / F+M0 / F+M+) and filled from small phrase
//! banks. A few stock replies recur often; everything else is combinatorial.
//! Utterance male bias comes out near 73%.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bins::GenderednessBin;
use crate::corpus::{Character, Dialogue, DialogueCorpus, GenderLabel, Utterance};

/// The corpus shipped as `data/synthetic_corpus.jsonl`.
pub const BUNDLED_CORPUS: &str = include_str!("../data/synthetic_corpus.jsonl");

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub dialogues: usize,
    pub turns_per_dialogue: usize,
    /// Every `test_every`-th dialogue is tagged `test`, the rest `train`.
    pub test_every: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            dialogues: 200,
            turns_per_dialogue: 8,
            test_every: 5,
            seed: DEFAULT_SEED,
        }
    }
}

/// Parse [`BUNDLED_CORPUS`].
pub fn bundled_corpus() -> DialogueCorpus {
    DialogueCorpus::parse_str(BUNDLED_CORPUS).expect("bundled corpus is valid")
}

const BIN_WEIGHTS: [(GenderednessBin, f64); 4] = [
    (GenderednessBin::F0M0, 0.60),
    (GenderednessBin::F0M_PLUS, 0.27),
    (GenderednessBin::F_PLUS_M0, 0.08),
    (GenderednessBin::F_PLUS_M_PLUS, 0.05),
];

const NEUTRAL_STOCK: &str = "That sounds good.";
const MALE_STOCK: &str = "Yes, my lord.";
const FEMALE_STOCK: &str = "Yes, my lady.";

const OPENERS: &[&str] = &[
    "Perhaps", "Look,", "Listen,", "Honestly,", "Well,", "Quickly,", "Friend,", "Traveler,", "Alas,", "Indeed,",
    "Tonight", "Today", "Hush,", "Truly,", "Ah,", "Hmm,",
];
const SUBJECTS: &[&str] = &[
    "I", "we", "you", "the guard", "the merchant", "the farmer", "the traveler", "the cook", "the child", "the hunter",
    "the healer", "the scribe", "the baker", "the bard", "the shepherd", "the innkeeper",
];
const VERBS: &[&str] = &[
    "found", "lost", "carried", "sold", "mended", "hid", "cleaned", "guarded", "burned", "traded", "polished", "stole",
    "painted", "buried", "counted", "opened",
];
const OBJECTS: &[&str] = &[
    "a sword", "the bread", "an old map", "the lantern", "a silver ring", "the barrel", "some apples", "the gate key",
    "a torn cloak", "the wagon", "a jar of honey", "the spellbook", "a wooden shield", "the goat", "a bag of coins",
    "the fishing net",
];
const PLACES: &[&str] = &[
    "near the river", "in the tavern", "behind the stables", "at the market", "by the old well", "inside the cave",
    "under the bridge", "in the forest", "on the hill", "at the harbor", "beside the chapel", "in the cellar",
    "past the mill", "at dawn", "before supper", "after the storm",
];
const QUESTIONS: &[&str] = &[
    "Where did you leave", "Have you seen", "Who took", "Why do you need", "Can you fetch", "Did anyone bring",
    "How much for", "When will you return",
];
const MALE_NOUNS: &[&str] = &[
    "king", "knight", "prince", "wizard", "father", "brother", "duke", "priest", "monk", "emperor", "uncle", "baron",
];
const FEMALE_NOUNS: &[&str] = &[
    "queen", "princess", "witch", "mother", "sister", "duchess", "priestess", "nun", "empress", "aunt", "baroness",
    "maiden",
];
const MALE_PRONOUN_LINES: &[&str] = &["He said", "His friend said", "I told him", "He swears"];
const FEMALE_PRONOUN_LINES: &[&str] = &["She said", "Her friend said", "I told her", "She swears"];

const NEUTRAL_ROLES: &[&str] = &[
    "guard", "merchant", "farmer", "traveler", "cook", "hunter", "healer", "scribe", "baker", "bard", "shepherd",
    "innkeeper", "blacksmith", "fisher", "miner", "archer",
];
const MALE_ROLES: &[&str] = &["king", "knight", "prince", "wizard", "monk", "duke", "priest", "baron"];
const FEMALE_ROLES: &[&str] = &["queen", "princess", "witch", "nun", "duchess", "priestess", "maiden"];
const NAMES: &[&str] = &[
    "Aldric", "Brenna", "Corin", "Dara", "Edwin", "Fiora", "Gareth", "Hilde", "Ivo", "Jessa", "Kael", "Lira", "Marek",
    "Nessa", "Orrin", "Petra", "Quill", "Rowan", "Sabine", "Tobin",
];
const PERSONA_ACTIVITIES: &[&str] = &[
    "I spend my days by the fire.",
    "I keep a small garden.",
    "I travel from town to town.",
    "I collect strange stones.",
    "I guard the northern road.",
    "I sing at the tavern most nights.",
    "I have never seen the sea.",
    "I owe money to half the village.",
];
const MALE_REFERENCES: &[&str] = &[
    "I want to follow in my father's footsteps.",
    "My brother taught me everything.",
    "I serve the king.",
    "My uncle left me his house.",
];
const FEMALE_REFERENCES: &[&str] = &["My mother taught me everything.", "I serve the queen."];

fn pick<'a>(rng: &mut ChaCha8Rng, bank: &[&'a str]) -> &'a str {
    bank.choose(rng).expect("non-empty bank")
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn draw_bin(rng: &mut ChaCha8Rng) -> GenderednessBin {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (bin, w) in BIN_WEIGHTS {
        acc += w;
        if x < acc {
            return bin;
        }
    }
    GenderednessBin::F_PLUS_M_PLUS
}

fn neutral_sentence(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => format!(
            "{} {} {} {} {}.",
            pick(rng, OPENERS),
            pick(rng, SUBJECTS),
            pick(rng, VERBS),
            pick(rng, OBJECTS),
            pick(rng, PLACES)
        ),
        1 => format!("{} {}?", pick(rng, QUESTIONS), pick(rng, OBJECTS)),
        _ => format!(
            "{} {} {} {}.",
            capitalize(pick(rng, SUBJECTS)),
            pick(rng, VERBS),
            pick(rng, OBJECTS),
            pick(rng, PLACES)
        ),
    }
}

/// A non-stock sentence with one gendered word of `gender` (`true` = male),
/// occasionally a second.
fn gendered_sentence(rng: &mut ChaCha8Rng, male: bool) -> String {
    let (nouns, pronouns) = if male {
        (MALE_NOUNS, MALE_PRONOUN_LINES)
    } else {
        (FEMALE_NOUNS, FEMALE_PRONOUN_LINES)
    };
    match rng.gen_range(0..4) {
        0 => format!(
            "The {} {} {} {}.",
            pick(rng, nouns),
            pick(rng, VERBS),
            pick(rng, OBJECTS),
            pick(rng, PLACES)
        ),
        1 => format!("{} {} for the {}?", pick(rng, QUESTIONS), pick(rng, OBJECTS), pick(rng, nouns)),
        2 => format!(
            "{} {} {} {}.",
            pick(rng, pronouns),
            pick(rng, SUBJECTS),
            pick(rng, VERBS),
            pick(rng, OBJECTS)
        ),
        _ => format!(
            "{} the {} {} {} with the {}.",
            pick(rng, OPENERS),
            pick(rng, nouns),
            pick(rng, VERBS),
            pick(rng, OBJECTS),
            pick(rng, nouns)
        ),
    }
}

fn turn_text(rng: &mut ChaCha8Rng, bin: GenderednessBin) -> String {
    let stock: f64 = rng.gen();
    match (bin.female_present, bin.male_present) {
        (false, false) if stock < 0.135 => NEUTRAL_STOCK.to_string(),
        (false, false) => neutral_sentence(rng),
        (false, true) if stock < 0.5 => MALE_STOCK.to_string(),
        (false, true) => gendered_sentence(rng, true),
        (true, false) if stock < 0.4 => FEMALE_STOCK.to_string(),
        (true, false) => gendered_sentence(rng, false),
        (true, true) => format!(
            "The {} and the {} {} {}.",
            pick(rng, MALE_NOUNS),
            pick(rng, FEMALE_NOUNS),
            pick(rng, VERBS),
            pick(rng, OBJECTS)
        ),
    }
}

fn character(rng: &mut ChaCha8Rng) -> Character {
    let name = pick(rng, NAMES).to_string();
    let x: f64 = rng.gen();
    let (role, label) = if x < 0.40 {
        (pick(rng, MALE_ROLES), GenderLabel::Male)
    } else if x < 0.55 {
        (pick(rng, FEMALE_ROLES), GenderLabel::Female)
    } else if x < 0.95 {
        (pick(rng, NEUTRAL_ROLES), GenderLabel::Neutral)
    } else {
        (pick(rng, NEUTRAL_ROLES), GenderLabel::Unknown)
    };
    let mut persona = format!("I am the {role}. {}", pick(rng, PERSONA_ACTIVITIES));
    let r: f64 = rng.gen();
    if r < 0.30 {
        persona.push(' ');
        persona.push_str(pick(rng, MALE_REFERENCES));
    } else if r < 0.40 {
        persona.push(' ');
        persona.push_str(pick(rng, FEMALE_REFERENCES));
    }
    Character {
        name,
        persona,
        gender_label: label,
    }
}

/// Generate the corpus. Identical configs give identical corpora.
pub fn generate_corpus(config: &SyntheticConfig) -> DialogueCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dialogues = (0..config.dialogues)
        .map(|i| {
            let characters = vec![character(&mut rng), character(&mut rng)];
            let turns = (0..config.turns_per_dialogue)
                .map(|t| {
                    let bin = draw_bin(&mut rng);
                    Utterance {
                        speaker_index: t % 2,
                        text: turn_text(&mut rng, bin),
                    }
                })
                .collect();
            let split = if config.test_every > 0 && i % config.test_every == config.test_every - 1 {
                "test"
            } else {
                "train"
            };
            Dialogue {
                id: format!("synth-{i:03}"),
                characters,
                turns,
                split: Some(split.to_string()),
            }
        })
        .collect();
    DialogueCorpus::new(dialogues).expect("generated dialogues are valid")
}
