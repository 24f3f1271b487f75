use genderation::audit::{audit, audit_dialogue, top_words, AuditScope, BiasReport, Stopwords};
use genderation::corpus::DialogueCorpus;
use genderation::lexicon::{Gender, GenderedLexicon};
use genderation::synthetic::bundled_corpus;
use proptest::prelude::*;

fn sequential(c: &DialogueCorpus, lex: &GenderedLexicon, scope: AuditScope) -> BiasReport {
    c.iter()
        .map(|d| audit_dialogue(d, lex, scope))
        .fold(BiasReport::default(), |a, b| a.merge(&b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn audit_is_additive_over_partitions(assign in prop::collection::vec(0usize..4, 200)) {
        let c = bundled_corpus();
        let lex = GenderedLexicon::default_lexicon();
        let whole = audit(&c, &lex, AuditScope::Full);
        let mut parts = vec![Vec::new(); 4];
        for (d, p) in c.iter().zip(&assign) {
            parts[*p].push(d.clone());
        }
        let merged = parts
            .into_iter()
            .map(|ds| audit(&DialogueCorpus::new(ds).unwrap(), &lex, AuditScope::Full))
            .fold(BiasReport::default(), |a, b| a.merge(&b));
        prop_assert_eq!(merged, whole);
    }
}

#[test]
fn parallel_equals_sequential() {
    let c = bundled_corpus();
    let lex = GenderedLexicon::default_lexicon();
    for scope in [AuditScope::Utterances, AuditScope::Personas, AuditScope::Full] {
        assert_eq!(audit(&c, &lex, scope), sequential(&c, &lex, scope));
    }
}

#[test]
fn scopes_agree() {
    let c = bundled_corpus();
    let lex = GenderedLexicon::default_lexicon();
    let full = audit(&c, &lex, AuditScope::Full);
    let utt = audit(&c, &lex, AuditScope::Utterances);
    let per = audit(&c, &lex, AuditScope::Personas);
    assert_eq!(full.word_counts(), utt.word_counts());
    assert_eq!(full.bin_counts, utt.bin_counts);
    assert_eq!(full.census, per.census);
    assert_eq!(full.persona_references.male, per.male_tokens);
    assert_eq!(full.persona_references.female, per.female_tokens);
    assert_eq!(full.census.total(), 400);
}

#[test]
fn top_words_flag_gender() {
    let lex = GenderedLexicon::default_lexicon();
    let texts = ["The queen rode out.", "The queen and the bard.", "A bard sang."];
    let top = top_words(&texts, &Stopwords::default_english(), 3, &lex);
    let words: Vec<&str> = top.iter().map(|w| w.word.as_str()).collect();
    assert_eq!(words, ["bard", "queen", "rode"]);
    assert_eq!(top[1].gender, Some(Gender::Female));
    assert_eq!(top[0].gender, None);
}
