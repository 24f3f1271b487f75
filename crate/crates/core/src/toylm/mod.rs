//! A small conditional n-gram language model over responses.
//!
//! Each genderedness bin has its own count table, and one shared table
//! aggregates all bins. A token's probability interpolates the two:
//!
//! ```text
//! P(t | bin, ctx) = λ · P_bin(t | ctx) + (1 − λ) · P_shared(t | ctx)
//! ```
//!
//! Each table estimates `P(t | ctx) = (count(ctx, t) + k) / (count(ctx) + k·|V|)`
//! at the longest suffix of `ctx` it has seen, dropping the oldest token
//! until it reaches the empty context; a table with no counts at all is
//! uniform. `|V|` is every vocabulary item except `<bos>`, which is never
//! predicted.
//!
//! Dialogue context is ignored except through the bin.

mod beam;
mod io;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::bins::{GenderednessBin, TrainingExample};
use crate::corpus::tokenize;

pub use beam::{generate, generate_text, GenerationConfig};

pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";
pub const UNK: &str = "<unk>";

pub type TokenId = u32;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot train on an empty example list")]
    EmptyTrainingSet,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub order: usize,
    pub lambda: f64,
    pub k: f64,
    /// Tokens seen fewer times than this across training responses become `<unk>`.
    pub min_count: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            order: 3,
            lambda: 0.7,
            k: 0.01,
            min_count: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.order == 0 {
            return Err(ModelError::InvalidConfig("order must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ModelError::InvalidConfig(format!("lambda {} is outside [0, 1]", self.lambda)));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(ModelError::InvalidConfig(format!("smoothing k {} must be positive", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextCounts {
    pub total: u64,
    pub next: BTreeMap<TokenId, u64>,
}

impl ContextCounts {
    fn add(&mut self, token: TokenId, n: u64) {
        self.total += n;
        *self.next.entry(token).or_default() += n;
    }
}

/// Counts for every context length from 0 to `order - 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    pub contexts: BTreeMap<Vec<TokenId>, ContextCounts>,
}

impl CountTable {
    fn add(&mut self, context: &[TokenId], token: TokenId, n: u64) {
        self.contexts.entry(context.to_vec()).or_default().add(token, n);
    }

    pub fn get(&self, context: &[TokenId]) -> Option<&ContextCounts> {
        self.contexts.get(context).filter(|c| c.total > 0)
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// Add-k distribution at the longest seen suffix of `context`, written
    /// into `out` (indexed by token id; `<bos>` gets 0).
    fn fill_distribution(&self, context: &[TokenId], k: f64, bos: TokenId, out: &mut [f64]) {
        let predictable = (out.len() - 1) as f64;
        let found = (0..=context.len())
            .map(|drop| &context[drop..])
            .find_map(|ctx| self.get(ctx));
        match found {
            Some(counts) => {
                let denom = counts.total as f64 + k * predictable;
                out.fill(k / denom);
                for (&t, &c) in &counts.next {
                    out[t as usize] += c as f64 / denom;
                }
            }
            None => out.fill(1.0 / predictable),
        }
        out[bos as usize] = 0.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalNGramModel {
    config: TrainConfig,
    vocab: Vec<String>,
    index: HashMap<String, TokenId>,
    bos: TokenId,
    eos: TokenId,
    unk: TokenId,
    shared: CountTable,
    per_bin: [CountTable; 4],
}

impl ConditionalNGramModel {
    /// Count response n-grams into each example's bin table and the shared
    /// table.
    pub fn train(examples: &[TrainingExample], config: &TrainConfig) -> Result<Self, ModelError> {
        config.validate()?;
        if examples.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let responses: Vec<(GenderednessBin, Vec<String>)> = examples
            .iter()
            .map(|ex| (ex.bin, tokenize(&ex.response).tokens))
            .collect();

        let mut freq: HashMap<&str, u64> = HashMap::new();
        for (_, tokens) in &responses {
            for t in tokens {
                *freq.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut vocab: Vec<String> = freq
            .into_iter()
            .filter(|&(_, n)| n >= config.min_count)
            .map(|(t, _)| t.to_string())
            .chain([BOS, EOS, UNK].map(String::from))
            .collect();
        vocab.sort();
        vocab.dedup();

        let mut model = Self::empty(*config, vocab);
        let pad = config.order - 1;
        for (bin, tokens) in &responses {
            let mut seq = vec![model.bos; pad];
            seq.extend(tokens.iter().map(|t| model.id(t)));
            seq.push(model.eos);
            for i in pad..seq.len() {
                for len in 0..=pad {
                    let ctx = &seq[i - len..i];
                    model.per_bin[bin.index()].add(ctx, seq[i], 1);
                    model.shared.add(ctx, seq[i], 1);
                }
            }
        }
        Ok(model)
    }

    fn empty(config: TrainConfig, vocab: Vec<String>) -> Self {
        let index: HashMap<String, TokenId> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Self {
            config,
            bos: index[BOS],
            eos: index[EOS],
            unk: index[UNK],
            index,
            vocab,
            shared: CountTable::default(),
            per_bin: Default::default(),
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    pub fn lambda(&self) -> f64 {
        self.config.lambda
    }

    /// Same counts, different interpolation weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self, ModelError> {
        let mut model = self.clone();
        model.config.lambda = lambda;
        model.config.validate()?;
        Ok(model)
    }

    /// All vocabulary items, sorted, including `<bos>`, `<eos>` and `<unk>`.
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Size of the predicted vocabulary (everything but `<bos>`).
    pub fn predictable_size(&self) -> usize {
        self.vocab.len() - 1
    }

    pub fn id(&self, token: &str) -> TokenId {
        self.index.get(token).copied().unwrap_or(self.unk)
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.vocab[id as usize]
    }

    pub fn bos(&self) -> TokenId {
        self.bos
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn unk(&self) -> TokenId {
        self.unk
    }

    pub fn shared_counts(&self) -> &CountTable {
        &self.shared
    }

    pub fn bin_counts(&self, bin: GenderednessBin) -> &CountTable {
        &self.per_bin[bin.index()]
    }

    /// Last `order - 1` ids of `history`, left-padded with `<bos>`.
    pub fn context_window(&self, history: &[TokenId]) -> Vec<TokenId> {
        let want = self.config.order - 1;
        let take = history.len().min(want);
        let mut ctx = vec![self.bos; want - take];
        ctx.extend_from_slice(&history[history.len() - take..]);
        ctx
    }

    /// Interpolated distribution over token ids for `bin` after `history`.
    pub fn distribution(&self, bin: GenderednessBin, history: &[TokenId]) -> Vec<f64> {
        let ctx = self.context_window(history);
        let n = self.vocab.len();
        let lambda = self.config.lambda;
        let mut shared = vec![0.0; n];
        self.shared.fill_distribution(&ctx, self.config.k, self.bos, &mut shared);
        if lambda == 0.0 {
            return shared;
        }
        let mut binned = vec![0.0; n];
        self.per_bin[bin.index()].fill_distribution(&ctx, self.config.k, self.bos, &mut binned);
        binned
            .iter()
            .zip(&shared)
            .map(|(b, s)| lambda * b + (1.0 - lambda) * s)
            .collect()
    }

    /// `P(token | bin, context)`. Out-of-vocabulary strings score as `<unk>`.
    pub fn prob(&self, bin: GenderednessBin, context: &[&str], token: &str) -> f64 {
        let history: Vec<TokenId> = context.iter().map(|t| self.id(t)).collect();
        self.distribution(bin, &history)[self.id(token) as usize]
    }
}
