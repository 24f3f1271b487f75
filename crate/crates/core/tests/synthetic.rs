use genderation::audit::{audit_utterances, bin_distribution};
use genderation::bins::GenderednessBin;
use genderation::lexicon::GenderedLexicon;
use genderation::synthetic::{bundled_corpus, generate_corpus, SyntheticConfig, BUNDLED_CORPUS};

#[test]
fn bundled_file_matches_generator() {
    let generated = generate_corpus(&SyntheticConfig::default());
    assert_eq!(generated.to_jsonl(), BUNDLED_CORPUS);
}

#[test]
fn bundled_corpus_shape() {
    let c = bundled_corpus();
    assert_eq!(c.len(), 200);
    let lex = GenderedLexicon::default_lexicon();
    let mb = audit_utterances(&c, &lex).pct_male_bias.unwrap();
    assert!((71.0..=75.0).contains(&mb), "male bias {mb}");
    let dist = bin_distribution(&c, &lex).unwrap();
    for (bin, target) in [
        (GenderednessBin::F0M0, 60.0),
        (GenderednessBin::F0M_PLUS, 27.0),
        (GenderednessBin::F_PLUS_M0, 8.0),
        (GenderednessBin::F_PLUS_M_PLUS, 5.0),
    ] {
        assert!((dist[&bin] - target).abs() < 3.0, "{bin}: {}", dist[&bin]);
    }
}
