//! JSON model files.
//!
//! ```text
//! {"format": "genderation-ngram", "version": 1, "order": 3, "lambda": 0.7,
//!  "k": 0.01, "min_count": 2, "vocab": ["<bos>", ...],
//!  "shared": [{"context": [ids], "next": [[id, count], ...]}, ...],
//!  "bins": {"F0M0": [...], "F0M+": [...], "F+M0": [...], "F+M+": [...]}}
//! ```
//!
//! Context totals are not stored; they are recomputed on load. The shared
//! table is checked against the sum of the bin tables.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConditionalNGramModel, ContextCounts, CountTable, ModelError, TokenId, TrainConfig, BOS, EOS, UNK};
use crate::bins::GenderednessBin;

const FORMAT: &str = "genderation-ngram";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    order: usize,
    lambda: f64,
    k: f64,
    min_count: u64,
    vocab: Vec<String>,
    shared: Vec<ContextRecord>,
    bins: BTreeMap<String, Vec<ContextRecord>>,
}

#[derive(Serialize, Deserialize)]
struct ContextRecord {
    context: Vec<TokenId>,
    next: Vec<(TokenId, u64)>,
}

fn records(table: &CountTable) -> Vec<ContextRecord> {
    table
        .contexts
        .iter()
        .map(|(ctx, counts)| ContextRecord {
            context: ctx.clone(),
            next: counts.next.iter().map(|(&t, &c)| (t, c)).collect(),
        })
        .collect()
}

fn table(records: Vec<ContextRecord>, vocab_len: usize, order: usize) -> Result<CountTable, ModelError> {
    let mut table = CountTable::default();
    for rec in records {
        if rec.context.len() >= order {
            return Err(ModelError::Format(format!(
                "context of length {} does not fit order {order}",
                rec.context.len()
            )));
        }
        let in_range = |t: &TokenId| (*t as usize) < vocab_len;
        if !rec.context.iter().all(in_range) || !rec.next.iter().all(|(t, _)| in_range(t)) {
            return Err(ModelError::Format("token id out of vocabulary range".into()));
        }
        let mut counts = ContextCounts::default();
        for (t, c) in rec.next {
            counts.add(t, c);
        }
        if table.contexts.insert(rec.context, counts).is_some() {
            return Err(ModelError::Format("duplicate context".into()));
        }
    }
    Ok(table)
}

impl ConditionalNGramModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            order: self.config.order,
            lambda: self.config.lambda,
            k: self.config.k,
            min_count: self.config.min_count,
            vocab: self.vocab.clone(),
            shared: records(&self.shared),
            bins: GenderednessBin::ALL
                .iter()
                .map(|b| (b.label().to_string(), records(&self.per_bin[b.index()])))
                .collect(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(ModelError::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let config = TrainConfig {
            order: file.order,
            lambda: file.lambda,
            k: file.k,
            min_count: file.min_count,
        };
        config.validate()?;
        if !file.vocab.windows(2).all(|w| w[0] < w[1]) {
            return Err(ModelError::Format("vocabulary must be sorted and unique".into()));
        }
        for special in [BOS, EOS, UNK] {
            if file.vocab.binary_search_by(|t| t.as_str().cmp(special)).is_err() {
                return Err(ModelError::Format(format!("vocabulary lacks {special}")));
            }
        }
        let n = file.vocab.len();
        let mut model = ConditionalNGramModel::empty(config, file.vocab);
        model.shared = table(file.shared, n, config.order)?;
        let mut bins = file.bins;
        for bin in GenderednessBin::ALL {
            let recs = bins
                .remove(bin.label())
                .ok_or_else(|| ModelError::Format(format!("missing table for bin {bin}")))?;
            model.per_bin[bin.index()] = table(recs, n, config.order)?;
        }
        if let Some(extra) = bins.keys().next() {
            return Err(ModelError::Format(format!("unknown bin table '{extra}'")));
        }
        let mut summed = CountTable::default();
        for t in &model.per_bin {
            for (ctx, counts) in &t.contexts {
                for (&tok, &c) in &counts.next {
                    summed.add(ctx, tok, c);
                }
            }
        }
        if summed != model.shared {
            return Err(ModelError::Format("shared counts differ from the sum of bin counts".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}
