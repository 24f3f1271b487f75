//! The `genderation` command-line pipeline.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 on I/O failure.
//! Diagnostics go to stderr; reports go to stdout or to files.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use genderation::bins::GenderednessBin;
use genderation::lexicon::GenderedLexicon;
use thiserror::Error;

/// Environment variable naming a lexicon file to use instead of the default.
pub const LEXICON_ENV: &str = "GENDERATION_LEXICON";

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<genderation::Error> for CliError {
    fn from(e: genderation::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

macro_rules! via_core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                genderation::Error::from(e).into()
            }
        }
    )*};
}

via_core_error!(
    genderation::lexicon::LexiconError,
    genderation::corpus::CorpusError,
    genderation::audit::AuditError,
    genderation::cda::CdaError,
    genderation::toylm::ModelError,
    genderation::eval::EvalError
);

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "genderation", version, about = "Measure and mitigate gender bias in dialogue corpora")]
pub struct Cli {
    /// Worker threads for per-dialogue work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Lexicon file, or `default` for the built-in list.
    #[arg(long, global = true)]
    pub lexicon: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gendered-word, character and bin statistics for one or more corpora.
    Audit(AuditArgs),
    /// Append gender-swapped copies of dialogues.
    Cda(CdaArgs),
    /// Extract (context, response) examples annotated with genderedness bins.
    Bin(BinArgs),
    /// Train the bin-conditioned n-gram model.
    Train(TrainArgs),
    /// Decode one response under a bin.
    Generate(GenerateArgs),
    /// Evaluate a model on annotated examples.
    Eval(EvalArgs),
    /// Run the whole pipeline on the bundled synthetic corpus.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Markdown => "markdown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    Utterances,
    Personas,
    Full,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Corpus file (JSONL); repeat for several rows.
    #[arg(long, required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "full")]
    pub scope: Scope,
    /// Keep only dialogues tagged with this split.
    #[arg(long)]
    pub split: Option<String>,
    /// Stopword file for the top-words list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    /// Include tokenization statistics.
    #[arg(long)]
    pub diagnostics: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CdaArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// turns, personas or both.
    #[arg(long, default_value = "both")]
    pub fields: String,
    /// Write one augmentation record per line here.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct BinArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub split: Option<String>,
    /// Leave contexts without control tokens.
    #[arg(long)]
    pub no_annotate: bool,
    /// Leave personas out of contexts.
    #[arg(long)]
    pub no_personas: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 0.7)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    pub k: f64,
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, default_value_t = 5)]
    pub beam: usize,
    #[arg(long, default_value_t = 30)]
    pub max_len: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Annotated examples (JSONL from `bin`).
    #[arg(long)]
    pub examples: PathBuf,
    /// Where to write the model.
    #[arg(long, alias = "out")]
    pub model: PathBuf,
    #[command(flatten)]
    pub params: ModelArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = parse_bin)]
    pub bin: GenderednessBin,
    /// Override the interpolation weight stored in the model.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Annotated test examples (JSONL from `bin`).
    #[arg(long)]
    pub examples: PathBuf,
    /// Force this bin for every example; default is each example's own bin.
    #[arg(long, value_parser = parse_bin)]
    pub bin: Option<GenderednessBin>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: Format,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Directory for eval_report.json, eval_report.md and generations.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Output directory.
    #[arg(long, default_value = "demo_out")]
    pub out: PathBuf,
    /// Use this corpus instead of the bundled one.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub params: ModelArgs,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

fn parse_bin(s: &str) -> std::result::Result<GenderednessBin, String> {
    s.parse().map_err(|e: genderation::bins::ParseBinError| e.to_string())
}

/// Lexicon named by `--lexicon`, else by [`LEXICON_ENV`], else the default.
pub fn resolve_lexicon(flag: Option<&str>) -> Result<GenderedLexicon> {
    let env = std::env::var(LEXICON_ENV).ok().filter(|v| !v.is_empty());
    match flag.map(str::to_string).or(env).as_deref() {
        None | Some("default") => Ok(GenderedLexicon::default_lexicon()),
        Some(path) => Ok(GenderedLexicon::load(path)?),
    }
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Invalid("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start worker pool: {e}")))?;
    let lexicon = resolve_lexicon(cli.lexicon.as_deref())?;
    pool.install(|| commands::dispatch(cli.command, &lexicon))
}
