use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use genderation::audit::{self, render, top_words, AuditScope, BiasReport, Stopwords, TokenizationDiagnostic, TopWord};
use genderation::bins::{extract_examples, extract_examples_with, ExtractOptions, GenderednessBin, TrainingExample, WordListBinner};
use genderation::cda::{augment, CdaFields};
use genderation::corpus::DialogueCorpus;
use genderation::eval::{evaluate_with, report_rows, EvalMode, EvalOptions, EvalReport, GoldResponder, NGramResponder};
use genderation::lexicon::GenderedLexicon;
use genderation::synthetic::bundled_corpus;
use genderation::toylm::{generate_text, ConditionalNGramModel, GenerationConfig, TrainConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{
    io_error, AuditArgs, BinArgs, CdaArgs, CliError, Command, DecodeArgs, DemoArgs, EvalArgs, Format, GenerateArgs,
    ModelArgs, Result, Scope, TrainArgs,
};

pub(crate) fn dispatch(command: Command, lexicon: &GenderedLexicon) -> Result<()> {
    match command {
        Command::Audit(args) => run_audit(args, lexicon),
        Command::Cda(args) => run_cda(args, lexicon),
        Command::Bin(args) => run_bin(args, lexicon),
        Command::Train(args) => run_train(args),
        Command::Generate(args) => run_generate(args),
        Command::Eval(args) => run_eval(args, lexicon),
        Command::Demo(args) => run_demo(args, lexicon),
    }
}

fn load_corpus(path: &Path, split: Option<&str>) -> Result<DialogueCorpus> {
    let corpus = DialogueCorpus::load(path)?;
    Ok(match split {
        Some(s) => corpus.filter_split(s),
        None => corpus,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| CliError::Invalid(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        out.push(item);
    }
    Ok(out)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_stopwords(path: Option<&Path>) -> Result<Stopwords> {
    match path {
        Some(p) => Stopwords::load(p).map_err(|e| io_error(p, e)),
        None => Ok(Stopwords::default_english()),
    }
}

fn train_config(p: &ModelArgs) -> TrainConfig {
    TrainConfig {
        order: p.order,
        lambda: p.lambda,
        k: p.k,
        min_count: p.min_count,
    }
}

fn generation_config(d: &DecodeArgs) -> Result<GenerationConfig> {
    if d.beam == 0 || d.max_len == 0 {
        return Err(CliError::Invalid("--beam and --max-len must be at least 1".into()));
    }
    Ok(GenerationConfig {
        beam_width: d.beam,
        max_length: d.max_len,
        seed: d.seed,
    })
}

#[derive(Serialize)]
struct AuditRow {
    name: String,
    dialogues: usize,
    report: BiasReport,
    top_words: Vec<TopWord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<TokenizationDiagnostic>,
}

fn audit_row(
    name: String,
    corpus: &DialogueCorpus,
    lexicon: &GenderedLexicon,
    scope: AuditScope,
    stopwords: &Stopwords,
    top_k: usize,
    diagnostics: bool,
) -> AuditRow {
    let texts: Vec<&str> = corpus.iter().flat_map(|d| d.turns.iter().map(|t| t.text.as_str())).collect();
    AuditRow {
        name,
        dialogues: corpus.len(),
        report: audit::audit(corpus, lexicon, scope),
        top_words: top_words(&texts, stopwords, top_k, lexicon),
        diagnostics: diagnostics.then(|| audit::tokenization_diagnostic(corpus, lexicon)),
    }
}

fn render_audit(rows: &[AuditRow], format: Format) -> String {
    match format {
        Format::Json => pretty(&rows),
        Format::Markdown => {
            let named: Vec<(&str, &BiasReport)> = rows.iter().map(|r| (r.name.as_str(), &r.report)).collect();
            let mut out = render::markdown(&named);
            out.push_str("\n### Top words (stop words removed, * marks gendered words)\n\n");
            for r in rows {
                out.push_str(&format!("- {}: {}\n", r.name, render::top_words_line(&r.top_words)));
            }
            out
        }
    }
}

fn row_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn run_audit(args: AuditArgs, lexicon: &GenderedLexicon) -> Result<()> {
    let stopwords = load_stopwords(args.stopwords.as_deref())?;
    let scope = match args.scope {
        Scope::Utterances => AuditScope::Utterances,
        Scope::Personas => AuditScope::Personas,
        Scope::Full => AuditScope::Full,
    };
    let mut rows = Vec::new();
    for path in &args.corpus {
        let corpus = load_corpus(path, args.split.as_deref())?;
        rows.push(audit_row(row_name(path), &corpus, lexicon, scope, &stopwords, args.top_k, args.diagnostics));
    }
    emit(args.out.as_deref(), &render_audit(&rows, args.format))
}

fn run_cda(args: CdaArgs, lexicon: &GenderedLexicon) -> Result<()> {
    let fields: CdaFields = args.fields.parse().map_err(CliError::Invalid)?;
    let corpus = load_corpus(&args.input, args.split.as_deref())?;
    let (augmented, records) = augment(&corpus, lexicon, fields)?;
    augmented.write(&args.out)?;
    if let Some(path) = &args.records {
        write_text(path, &to_jsonl(&records))?;
    }
    eprintln!("{} dialogues in, {} swapped copies added", corpus.len(), records.len());
    Ok(())
}

fn run_bin(args: BinArgs, lexicon: &GenderedLexicon) -> Result<()> {
    let corpus = load_corpus(&args.input, args.split.as_deref())?;
    let options = ExtractOptions {
        annotate: !args.no_annotate,
        include_personas: !args.no_personas,
    };
    let examples = extract_examples_with(&corpus, &WordListBinner { lexicon }, options);
    write_text(&args.out, &to_jsonl(&examples))?;
    eprintln!("{} examples written", examples.len());
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let examples: Vec<TrainingExample> = read_jsonl(&args.examples)?;
    let model = ConditionalNGramModel::train(&examples, &train_config(&args.params))?;
    model.save(&args.model)?;
    eprintln!("trained on {} examples, vocabulary {}", examples.len(), model.vocab().len());
    Ok(())
}

fn load_model(path: &Path, lambda: Option<f64>) -> Result<ConditionalNGramModel> {
    let model = ConditionalNGramModel::load(path)?;
    Ok(match lambda {
        Some(l) => model.with_lambda(l)?,
        None => model,
    })
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let model = load_model(&args.model, args.lambda)?;
    let config = generation_config(&args.decode)?;
    println!("{}", generate_text(&model, args.bin, &config));
    Ok(())
}

struct EvalOutputs {
    json: String,
    markdown: String,
}

fn render_eval(rows: &[(&str, &EvalReport)]) -> Result<EvalOutputs> {
    Ok(EvalOutputs {
        json: report_rows(rows, "json")?,
        markdown: report_rows(rows, "markdown")?,
    })
}

fn run_eval(args: EvalArgs, lexicon: &GenderedLexicon) -> Result<()> {
    let model = load_model(&args.model, args.lambda)?;
    let config = generation_config(&args.decode)?;
    let test: Vec<TrainingExample> = read_jsonl(&args.examples)?;
    let options = EvalOptions {
        stopwords: load_stopwords(args.stopwords.as_deref())?,
        ..EvalOptions::default()
    };
    let mode = args.bin.map_or(EvalMode::OracleBin, EvalMode::Forced);
    let report = evaluate_with(&NGramResponder::new(&model, config), &test, mode, lexicon, &options)?;
    let label = match mode {
        EvalMode::OracleBin => "Model".to_string(),
        EvalMode::Forced(b) => format!("Model {b}"),
    };
    let rendered = render_eval(&[(label.as_str(), &report)])?;
    match &args.out {
        Some(dir) => {
            write_text(&dir.join("eval_report.json"), &rendered.json)?;
            write_text(&dir.join("eval_report.md"), &rendered.markdown)?;
            write_text(&dir.join("generations.jsonl"), &to_jsonl(&report.records))?;
        }
        None => print!(
            "{}",
            match args.format {
                Format::Json => &rendered.json,
                Format::Markdown => &rendered.markdown,
            }
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct DemoConfig<'a> {
    corpus: &'a str,
    order: usize,
    lambda: f64,
    k: f64,
    min_count: u64,
    beam_width: usize,
    max_length: usize,
    seed: u64,
}

fn run_demo(args: DemoArgs, lexicon: &GenderedLexicon) -> Result<()> {
    let (corpus, corpus_name) = match &args.corpus {
        Some(path) => (load_corpus(path, None)?, row_name(path)),
        None => (bundled_corpus(), "bundled synthetic corpus".to_string()),
    };
    let train = corpus.filter_split("train");
    let test = corpus.filter_split("test");
    if train.is_empty() || test.is_empty() {
        return Err(CliError::Invalid("demo corpus needs dialogues tagged train and test".into()));
    }
    let config = train_config(&args.params);
    let decode = generation_config(&args.decode)?;
    let out = &args.out;
    let file = |name: &str| -> PathBuf { out.join(name) };

    write_text(
        &file("config.json"),
        &pretty(&DemoConfig {
            corpus: &corpus_name,
            order: config.order,
            lambda: config.lambda,
            k: config.k,
            min_count: config.min_count,
            beam_width: decode.beam_width,
            max_length: decode.max_length,
            seed: decode.seed,
        }),
    )?;

    let stopwords = Stopwords::default_english();
    let audit_rows: Vec<AuditRow> = [("train", &train), ("test", &test), ("all", &corpus)]
        .into_iter()
        .map(|(name, c)| audit_row(name.into(), c, lexicon, AuditScope::Full, &stopwords, 20, true))
        .collect();
    write_text(&file("audit_report.json"), &render_audit(&audit_rows, Format::Json))?;
    write_text(&file("audit_report.md"), &render_audit(&audit_rows, Format::Markdown))?;

    let (cda_train, records) = augment(&train, lexicon, CdaFields::Both)?;
    cda_train.write(file("cda_train.jsonl"))?;
    write_text(&file("cda_records.jsonl"), &to_jsonl(&records))?;

    let base_examples = extract_examples(&train, lexicon, true);
    let all_examples = extract_examples(&cda_train, lexicon, true);
    let test_examples = extract_examples(&test, lexicon, true);
    write_text(&file("train_examples.jsonl"), &to_jsonl(&base_examples))?;
    write_text(&file("cda_train_examples.jsonl"), &to_jsonl(&all_examples))?;
    write_text(&file("test_examples.jsonl"), &to_jsonl(&test_examples))?;

    let bias_ctrl = ConditionalNGramModel::train(&base_examples, &config)?;
    let all = ConditionalNGramModel::train(&all_examples, &config)?;
    bias_ctrl.save(file("bias_ctrl_model.json"))?;
    all.save(file("model.json"))?;
    let baseline = bias_ctrl.with_lambda(0.0)?;
    let cda_only = all.with_lambda(0.0)?;

    let options = EvalOptions::default();
    let run = |gen: &dyn genderation::eval::ResponseGenerator, mode| {
        evaluate_with(gen, &test_examples, mode, lexicon, &options)
    };
    let mut rows: Vec<(String, &'static str, EvalReport)> = vec![
        ("Gold".into(), "gold", run(&GoldResponder, EvalMode::OracleBin)?),
        ("Baseline".into(), "baseline", run(&NGramResponder::new(&baseline, decode), EvalMode::OracleBin)?),
        ("CDA".into(), "cda", run(&NGramResponder::new(&cda_only, decode), EvalMode::OracleBin)?),
        ("Bias Ctrl".into(), "bias_ctrl", run(&NGramResponder::new(&bias_ctrl, decode), EvalMode::OracleBin)?),
        ("ALL".into(), "all", run(&NGramResponder::new(&all, decode), EvalMode::OracleBin)?),
    ];
    let all_responder = NGramResponder::new(&all, decode);
    for (bin, slug) in GenderednessBin::ALL.into_iter().zip(["all_f0m0", "all_f0mp", "all_fpm0", "all_fpmp"]) {
        rows.push((format!("ALL {bin}"), slug, run(&all_responder, EvalMode::Forced(bin))?));
    }

    let named: Vec<(&str, &EvalReport)> = rows.iter().map(|(l, _, r)| (l.as_str(), r)).collect();
    let rendered = render_eval(&named)?;
    write_text(&file("eval_report.json"), &rendered.json)?;
    write_text(&file("eval_report.md"), &rendered.markdown)?;
    for (_, slug, report) in &rows {
        let name = if *slug == "all" {
            "generations.jsonl".to_string()
        } else {
            format!("generations_{slug}.jsonl")
        };
        write_text(&file(&name), &to_jsonl(&report.records))?;
    }

    eprintln!(
        "demo: {} train / {} test dialogues, {} CDA copies, {} test examples; outputs in {}",
        train.len(),
        test.len(),
        records.len(),
        test_examples.len(),
        out.display()
    );
    Ok(())
}
