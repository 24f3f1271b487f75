use genderation::corpus::{Character, Dialogue, DialogueCorpus, GenderLabel, Utterance};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = GenderLabel> {
    prop::sample::select(vec![GenderLabel::Female, GenderLabel::Male, GenderLabel::Neutral, GenderLabel::Unknown])
}

fn dialogue(id: usize) -> impl Strategy<Value = Dialogue> {
    let character = ("[A-Za-z][A-Za-z ]{0,8}", "\\PC{0,30}", label()).prop_map(|(name, persona, gender_label)| Character {
        name,
        persona,
        gender_label,
    });
    (
        prop::collection::vec(character, 1..4),
        prop::collection::vec((0usize..8, "[a-z]\\PC{0,40}"), 0..6),
        prop::option::of(prop::sample::select(vec!["train", "valid", "test"])),
    )
        .prop_map(move |(characters, turns, split)| {
            let n = characters.len();
            Dialogue {
                id: format!("d{id}"),
                turns: turns
                    .into_iter()
                    .map(|(s, text)| Utterance {
                        speaker_index: s % n,
                        text,
                    })
                    .collect(),
                characters,
                split: split.map(String::from),
            }
        })
}

fn corpus() -> impl Strategy<Value = DialogueCorpus> {
    (0usize..6)
        .prop_flat_map(|n| (0..n).map(dialogue).collect::<Vec<_>>())
        .prop_map(|ds| DialogueCorpus::new(ds).unwrap())
}

proptest! {
    #[test]
    fn jsonl_round_trip(c in corpus()) {
        let text = c.to_jsonl();
        let back = DialogueCorpus::parse_str(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn file_round_trip(c in corpus()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        c.write(&path).unwrap();
        prop_assert_eq!(DialogueCorpus::load(&path).unwrap(), c);
    }

    #[test]
    fn split_filter_partitions(c in corpus()) {
        let total: usize = ["train", "valid", "test"].iter().map(|s| c.filter_split(s).len()).sum();
        let untagged = c.iter().filter(|d| d.split.is_none()).count();
        prop_assert_eq!(total + untagged, c.len());
    }
}

#[test]
fn blank_lines_are_skipped_and_errors_carry_line_numbers() {
    let good = r#"{"id":"a","characters":[{"name":"x","persona":"","gender_label":"N"}],"turns":[]}"#;
    let c = DialogueCorpus::parse_str(&format!("\n{good}\n\n")).unwrap();
    assert_eq!(c.len(), 1);
    let err = DialogueCorpus::parse_str(&format!("{good}\n{good}\n")).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let err = DialogueCorpus::parse_str("{not json}\n").unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
}
