//! Beam-search decoding for [`ConditionalNGramModel`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{ConditionalNGramModel, TokenId};
use crate::bins::GenderednessBin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub beam_width: usize,
    /// Maximum number of generated tokens, `<eos>` excluded.
    pub max_length: usize,
    /// Recorded with outputs for provenance. Beam search itself is
    /// deterministic and does not draw from it.
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            beam_width: 5,
            max_length: 30,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
struct Hypothesis {
    tokens: Vec<TokenId>,
    score: f64,
}

/// Higher score first; equal scores fall back to lexicographic token order.
/// Token ids are assigned in sorted vocabulary order, so comparing ids
/// compares the token strings.
fn rank(a_score: f64, a_tokens: &[TokenId], b_score: f64, b_tokens: &[TokenId]) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_tokens.cmp(b_tokens))
}

/// Decode the highest-scoring response for `bin`.
///
/// Each step expands every live hypothesis, keeps the `beam_width` best
/// candidates, and retires those that end in `<eos>`. Decoding stops when no
/// hypothesis is live, when the best retired score can no longer be beaten
/// (scores only fall as sequences grow), or at `max_length`, where live
/// hypotheses are retired as they are. `<bos>` and `<unk>` are never emitted.
pub fn generate(model: &ConditionalNGramModel, bin: GenderednessBin, config: &GenerationConfig) -> Vec<String> {
    assert!(config.beam_width >= 1 && config.max_length >= 1, "beam_width and max_length must be positive");
    let width = config.beam_width;
    let (bos, eos, unk) = (model.bos(), model.eos(), model.unk());
    let mut live = vec![Hypothesis {
        tokens: Vec::new(),
        score: 0.0,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();

    for step in 0..config.max_length {
        // (parent index, token, score)
        let mut candidates: Vec<(usize, TokenId, f64)> = Vec::with_capacity(live.len() * width);
        for (pi, hyp) in live.iter().enumerate() {
            let dist = model.distribution(bin, &hyp.tokens);
            let mut options: Vec<(TokenId, f64)> = dist
                .iter()
                .enumerate()
                .map(|(t, &p)| (t as TokenId, p))
                .filter(|&(t, p)| t != bos && t != unk && p > 0.0)
                .collect();
            // only the best `width` children of one parent can survive
            options.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            options.truncate(width);
            candidates.extend(options.into_iter().map(|(t, p)| (pi, t, hyp.score + p.ln())));
        }
        let seq_of = |&(pi, t, _): &(usize, TokenId, f64)| {
            let mut s = live[pi].tokens.clone();
            s.push(t);
            s
        };
        let mut scored: Vec<(Vec<TokenId>, f64)> = candidates.iter().map(|c| (seq_of(c), c.2)).collect();
        scored.sort_by(|a, b| rank(a.1, &a.0, b.1, &b.0));
        scored.truncate(width);

        let mut next = Vec::with_capacity(width);
        for (mut tokens, score) in scored {
            if tokens.last() == Some(&eos) {
                tokens.pop();
                finished.push(Hypothesis { tokens, score });
            } else {
                next.push(Hypothesis { tokens, score });
            }
        }
        live = next;
        if live.is_empty() || step + 1 == config.max_length {
            break;
        }
        // Every further token has probability below 1, so a live hypothesis
        // can only fall below a retired one that already matches it.
        let best_live = live.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max);
        if finished.iter().any(|h| h.score >= best_live) {
            live.clear();
            break;
        }
    }
    finished.extend(live);
    finished
        .into_iter()
        .min_by(|a, b| rank(a.score, &a.tokens, b.score, &b.tokens))
        .map(|h| h.tokens.iter().map(|&t| model.token(t).to_string()).collect())
        .unwrap_or_default()
}

/// [`generate`] joined with single spaces.
pub fn generate_text(model: &ConditionalNGramModel, bin: GenderednessBin, config: &GenerationConfig) -> String {
    generate(model, bin, config).join(" ")
}
