//! Regenerate `data/synthetic_corpus.jsonl`.
//!
//! ```text
//! cargo run -p genderation-core --example make_synthetic_corpus [OUT]
//! ```

use genderation::synthetic::{generate_corpus, SyntheticConfig};

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_corpus.jsonl").to_string());
    let corpus = generate_corpus(&SyntheticConfig::default());
    if let Err(e) = corpus.write(&out) {
        eprintln!("{e}");
        std::process::exit(2);
    }
    eprintln!("wrote {} dialogues to {out}", corpus.len());
}
