//! Measuring and mitigating gender bias in dialogue corpora.
//!
//! - [`lexicon`]: gendered word list and swapping
//! - [`corpus`]: dialogue records and the shared tokenizer
//! - [`audit`]: gendered-word statistics and reports
//! - [`cda`]: counterfactual data augmentation
//! - [`bins`]: genderedness bins and control-token annotation
//! - [`toylm`]: a bin-conditioned n-gram model with beam search
//! - [`eval`]: per-bin evaluation of generations
//! - [`synthetic`]: the bundled demo corpus

pub mod audit;
pub mod bins;
pub mod cda;
pub mod corpus;
pub mod eval;
pub mod lexicon;
pub mod synthetic;
pub mod toylm;

use thiserror::Error;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lexicon(#[from] lexicon::LexiconError),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Audit(#[from] audit::AuditError),
    #[error(transparent)]
    Cda(#[from] cda::CdaError),
    #[error(transparent)]
    Model(#[from] toylm::ModelError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}

impl Error {
    /// Whether the error came from the filesystem rather than from content.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Lexicon(lexicon::LexiconError::Io { .. })
                | Error::Corpus(corpus::CorpusError::Io { .. })
                | Error::Model(toylm::ModelError::Io { .. })
        )
    }
}
