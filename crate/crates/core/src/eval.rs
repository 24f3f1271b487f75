//! Per-bin evaluation of generated responses: gendered-word share, male
//! bias and F1 word overlap with the gold response, split by the gold
//! response's genderedness bin.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{render, top_words, Stopwords, TopWord, WordCounts};
use crate::bins::{GenderednessBin, TrainingExample};
use crate::corpus::tokenize;
use crate::lexicon::GenderedLexicon;
use crate::toylm::{generate_text, ConditionalNGramModel, GenerationConfig};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot evaluate an empty test set")]
    EmptyTestSet,
    #[error("unknown report format '{0}' (expected json or markdown)")]
    UnknownFormat(String),
}

/// Bag-of-tokens F1 between a generated and a gold response.
///
/// Both empty scores 1.0; exactly one empty, or no overlap, scores 0.0.
pub fn f1_overlap(generated: &str, gold: &str) -> f64 {
    let gen = tokenize(generated).tokens;
    let gold = tokenize(gold).tokens;
    if gen.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if gen.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let mut bag: HashMap<&str, usize> = HashMap::new();
    for t in &gold {
        *bag.entry(t).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in &gen {
        if let Some(n) = bag.get_mut(t.as_str()) {
            if *n > 0 {
                *n -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / gen.len() as f64;
    let recall = overlap as f64 / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Anything that can produce a response for a test example under a bin.
pub trait ResponseGenerator: Sync {
    fn respond(&self, example: &TrainingExample, bin: GenderednessBin) -> String;
}

/// Returns the gold response; the reference row of an evaluation table.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldResponder;

impl ResponseGenerator for GoldResponder {
    fn respond(&self, example: &TrainingExample, _bin: GenderednessBin) -> String {
        example.response.clone()
    }
}

/// Beam-search responses from the n-gram model. The model only sees the
/// bin, so each bin is decoded once and reused.
pub struct NGramResponder<'a> {
    model: &'a ConditionalNGramModel,
    config: GenerationConfig,
    cache: Mutex<HashMap<GenderednessBin, String>>,
}

impl<'a> NGramResponder<'a> {
    pub fn new(model: &'a ConditionalNGramModel, config: GenerationConfig) -> Self {
        Self {
            model,
            config,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl ResponseGenerator for NGramResponder<'_> {
    fn respond(&self, _example: &TrainingExample, bin: GenderednessBin) -> String {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&bin) {
            return hit.clone();
        }
        let text = generate_text(self.model, bin, &self.config);
        self.cache.lock().expect("cache lock").insert(bin, text.clone());
        text
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Generate under each example's true bin.
    OracleBin,
    /// Generate under one bin for every example.
    Forced(GenderednessBin),
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalMode::OracleBin => f.write_str("oracle"),
            EvalMode::Forced(b) => write!(f, "forced {b}"),
        }
    }
}

/// One evaluated example; a line of `generations.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub context: String,
    pub gold: String,
    pub generated: String,
    pub true_bin: GenderednessBin,
    pub used_bin: GenderednessBin,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub examples: usize,
    pub total_tokens: u64,
    pub female_tokens: u64,
    pub male_tokens: u64,
    pub pct_gendered_words: Option<f64>,
    pub pct_male_bias: Option<f64>,
    pub f1_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: String,
    /// Keyed by the true bin of the gold response; only bins present in
    /// the test set appear.
    pub per_bin: BTreeMap<GenderednessBin, BinMetrics>,
    pub overall_f1: f64,
    pub top_words: Vec<TopWord>,
    #[serde(skip)]
    pub records: Vec<GenerationRecord>,
}

/// Mean of `values`, summed in sorted order so the result does not depend
/// on the order records arrive in.
fn stable_mean(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub stopwords: Stopwords,
    pub top_k: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            stopwords: Stopwords::default_english(),
            top_k: 20,
        }
    }
}

impl EvalReport {
    /// Aggregate per-example records.
    pub fn from_records(
        mode: String,
        records: Vec<GenerationRecord>,
        lexicon: &GenderedLexicon,
        options: &EvalOptions,
    ) -> EvalReport {
        let mut splits: BTreeMap<GenderednessBin, (WordCounts, Vec<f64>)> = BTreeMap::new();
        for r in &records {
            let entry = splits.entry(r.true_bin).or_default();
            entry.0.add_text(&r.generated, lexicon);
            entry.1.push(r.f1);
        }
        let per_bin = splits
            .into_iter()
            .map(|(bin, (words, f1s))| {
                let metrics = BinMetrics {
                    examples: f1s.len(),
                    total_tokens: words.total_tokens,
                    female_tokens: words.female_tokens,
                    male_tokens: words.male_tokens,
                    pct_gendered_words: words.pct_gendered_words(),
                    pct_male_bias: words.pct_male_bias(),
                    f1_score: stable_mean(f1s),
                };
                (bin, metrics)
            })
            .collect();
        let overall_f1 = stable_mean(records.iter().map(|r| r.f1).collect());
        let generated: Vec<&str> = records.iter().map(|r| r.generated.as_str()).collect();
        let top_words = top_words(&generated, &options.stopwords, options.top_k, lexicon);
        EvalReport {
            mode,
            per_bin,
            overall_f1,
            top_words,
            records,
        }
    }

    /// Word counts over all generations, all splits together.
    pub fn overall_counts(&self) -> WordCounts {
        let mut total = WordCounts::default();
        for m in self.per_bin.values() {
            total.merge(&WordCounts {
                total_tokens: m.total_tokens,
                female_tokens: m.female_tokens,
                male_tokens: m.male_tokens,
            });
        }
        total
    }
}

/// Generate for every test example and aggregate by true bin.
pub fn evaluate_with(
    generator: &dyn ResponseGenerator,
    test: &[TrainingExample],
    mode: EvalMode,
    lexicon: &GenderedLexicon,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let records: Vec<GenerationRecord> = test
        .par_iter()
        .map(|ex| {
            let used_bin = match mode {
                EvalMode::OracleBin => ex.bin,
                EvalMode::Forced(b) => b,
            };
            let generated = generator.respond(ex, used_bin);
            GenerationRecord {
                context: ex.context.clone(),
                gold: ex.response.clone(),
                f1: f1_overlap(&generated, &ex.response),
                generated,
                true_bin: ex.bin,
                used_bin,
            }
        })
        .collect();
    Ok(EvalReport::from_records(mode.to_string(), records, lexicon, options))
}

/// Evaluate the n-gram model with beam search and default report options.
pub fn evaluate(
    model: &ConditionalNGramModel,
    test: &[TrainingExample],
    mode: EvalMode,
    config: &GenerationConfig,
    lexicon: &GenderedLexicon,
) -> Result<EvalReport, EvalError> {
    let responder = NGramResponder::new(model, *config);
    evaluate_with(&responder, test, mode, lexicon, &EvalOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(EvalError::UnknownFormat(other.to_string())),
        }
    }
}

/// Render one report. See [`report_rows`].
pub fn report(eval: &EvalReport, format: &str) -> Result<String, EvalError> {
    report_rows(&[("Model", eval)], format)
}

/// Render several labelled reports as one document.
///
/// JSON is an object keyed by label with full-precision numbers and `null`
/// for undefined male bias. Markdown is a per-bin table (two decimals, F1
/// as a percentage, undefined male bias as `0`, bins absent from the test
/// set as `-`) followed by one top-words line per row, gendered words
/// marked with `*`.
pub fn report_rows(rows: &[(&str, &EvalReport)], format: &str) -> Result<String, EvalError> {
    match format.parse::<ReportFormat>()? {
        ReportFormat::Json => {
            let map: BTreeMap<&str, &EvalReport> = rows.iter().copied().collect();
            let mut s = serde_json::to_string_pretty(&map).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Markdown => Ok(markdown(rows)),
    }
}

fn markdown(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = String::new();
    out.push_str("| Model |");
    for b in GenderednessBin::ALL {
        out.push_str(&format!(" {b} % gend. words | {b} % male bias | {b} F1 |"));
    }
    out.push_str(" All F1 |\n|---|");
    out.push_str(&"---:|".repeat(3 * GenderednessBin::ALL.len() + 1));
    out.push('\n');
    for (label, r) in rows {
        out.push_str(&format!("| {label} |"));
        for b in GenderednessBin::ALL {
            match r.per_bin.get(&b) {
                Some(m) => out.push_str(&format!(
                    " {} | {} | {:.2} |",
                    render::pct(m.pct_gendered_words),
                    render::pct(m.pct_male_bias),
                    100.0 * m.f1_score
                )),
                None => out.push_str(" - | - | - |"),
            }
        }
        out.push_str(&format!(" {:.2} |\n", 100.0 * r.overall_f1));
    }
    out.push_str("\nTop generated words (stop words removed, * marks gendered words):\n\n");
    for (label, r) in rows {
        out.push_str(&format!("- {label}: {}\n", render::top_words_line(&r.top_words)));
    }
    out
}
