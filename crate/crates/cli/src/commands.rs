use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sumstate::config::{RunConfig, SummaryMethod};
use sumstate::corpus::{lead_baseline, load_corpus, load_summaries, write_summaries, Document, Summary};
use sumstate::eval::{compare, evaluate_with, EvalReport};
use sumstate::model::{
    load_checkpoint, save_checkpoint, summarize as model_summarize, train_from, BatchLog, EpochLog,
    ModelParams, Vocab,
};
use sumstate::oracle::{
    bow_oracle, compressive_oracle, extractive_oracle, heuristic_spans, load_labels, write_labels,
    OracleKind, OracleLabels,
};
use sumstate::rouge::RougeTriple;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(sumstate::Error),
}

impl CliError {
    /// 2 for bad invocations and bad input, 1 for internal failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<sumstate::Error> for CliError {
    fn from(e: sumstate::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| {
        CliError::Usage(format!(
            "missing --{} (or `{key}` in the configuration file)",
            key.replace('_', "-")
        ))
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| sumstate::Error::io(path, e).into())
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| sumstate::Error::io(path, e).into())
}

fn read_corpus(path: &Path, strict: bool) -> Result<Vec<Document>> {
    let loaded = load_corpus(path, strict)?;
    if loaded.skipped > 0 {
        eprintln!(
            "note: skipped {} invalid records in {}",
            loaded.skipped,
            path.display()
        );
    }
    if loaded.truncated > 0 {
        eprintln!(
            "note: truncated {} over-long documents in {}",
            loaded.truncated,
            path.display()
        );
    }
    Ok(loaded.documents)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

pub fn oracle(cfg: &RunConfig) -> Result<()> {
    let out = require(&cfg.out, "out")?;
    let docs = read_corpus(require(&cfg.corpus, "corpus")?, cfg.strict)?;
    if cfg.objective == OracleKind::Compressive {
        let missing = docs.iter().filter(|d| d.spans.is_none()).count();
        if missing > 0 {
            eprintln!(
                "note: spans=heuristic for {missing} of {} documents (no compression spans in the corpus)",
                docs.len()
            );
        }
    }
    let params = cfg.compressive_params();
    let labels: Vec<OracleLabels> = pool(cfg.workers)?.install(|| {
        docs.par_iter()
            .map(|doc| match cfg.objective {
                OracleKind::Extractive => Ok(extractive_oracle(doc, cfg.pool, cfg.max_len)),
                OracleKind::Bow => Ok(bow_oracle(doc)),
                OracleKind::Compressive => match &doc.spans {
                    Some(spans) => compressive_oracle(doc, spans, &params),
                    None => compressive_oracle(doc, &heuristic_spans(doc), &params),
                },
            })
            .collect::<sumstate::Result<_>>()
    })?;
    let mut w = create(out)?;
    write_labels(&docs, &labels, &mut w)?;
    finish(w, out)?;
    let mean = if labels.is_empty() {
        0.0
    } else {
        labels.iter().map(|l| l.score).sum::<f64>() / labels.len() as f64
    };
    println!(
        "{} oracle: {} documents, mean score {mean:.6}",
        cfg.objective,
        docs.len()
    );
    Ok(())
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LogLine<'a> {
    Batch(&'a BatchLog),
    Epoch(&'a EpochLog),
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let out = require(&cfg.out, "out")?;
    let docs = read_corpus(require(&cfg.corpus, "corpus")?, cfg.strict)?;
    let labels = load_labels(require(&cfg.labels, "labels")?, &docs)?;
    let validation = match &cfg.validation {
        Some(path) => {
            let vdocs = read_corpus(path, cfg.strict)?;
            let vlabels = load_labels(require(&cfg.validation_labels, "validation_labels")?, &vdocs)?;
            Some((vdocs, vlabels))
        }
        None => None,
    };
    let init = ModelParams::init(cfg.model.clone(), Vocab::build(&docs));
    let (params, report) = train_from(
        init,
        &docs,
        &labels,
        validation.as_ref().map(|(d, l)| (d.as_slice(), l.as_slice())),
    )?;
    save_checkpoint(&params, out)?;
    if let Some(log_path) = &cfg.log {
        let mut w = create(log_path)?;
        for epoch in &report.epochs {
            for b in report.batches.iter().filter(|b| b.epoch == epoch.epoch) {
                serde_json::to_writer(&mut w, &LogLine::Batch(b)).map_err(sumstate::Error::from)?;
                w.write_all(b"\n").map_err(|e| sumstate::Error::io(log_path, e))?;
            }
            serde_json::to_writer(&mut w, &LogLine::Epoch(epoch)).map_err(sumstate::Error::from)?;
            w.write_all(b"\n").map_err(|e| sumstate::Error::io(log_path, e))?;
        }
        finish(w, log_path)?;
    }
    for e in &report.epochs {
        match (e.validation_loss, e.validation_accuracy) {
            (Some(vl), Some(va)) => println!(
                "epoch {:>3}  loss {:.6}  validation loss {vl:.6}  validation accuracy {va:.4}",
                e.epoch, e.mean_loss
            ),
            _ => println!("epoch {:>3}  loss {:.6}", e.epoch, e.mean_loss),
        }
    }
    println!(
        "checkpoint: {} ({} parameters)",
        out.display(),
        params.num_parameters()
    );
    Ok(())
}

pub fn summarize(cfg: &RunConfig) -> Result<()> {
    let out = require(&cfg.out, "out")?;
    let docs = read_corpus(require(&cfg.corpus, "corpus")?, cfg.strict)?;
    let summaries: Vec<Summary> = match cfg.method {
        SummaryMethod::Lead => docs.iter().map(|d| lead_baseline(d, cfg.lead)).collect(),
        SummaryMethod::Labels => load_labels(require(&cfg.labels, "labels")?, &docs)?
            .iter()
            .map(OracleLabels::summary)
            .collect(),
        SummaryMethod::Model => {
            let params = load_checkpoint(require(&cfg.checkpoint, "checkpoint")?)?;
            let mut fallbacks = 0;
            let mut out = Vec::with_capacity(docs.len());
            for doc in &docs {
                let s = model_summarize(doc, &params)?;
                fallbacks += usize::from(s.fallback);
                out.push(s.summary);
            }
            if fallbacks > 0 {
                eprintln!("note: {fallbacks} documents selected no sentence; used the most probable one");
            }
            out
        }
    };
    let mut w = create(out)?;
    write_summaries(&docs, &summaries, &mut w)?;
    finish(w, out)?;
    let words: usize = summaries.iter().map(Summary::word_count).sum();
    let sents: usize = summaries.iter().map(Summary::num_sentences).sum();
    let n = docs.len().max(1) as f64;
    println!(
        "{} summaries: mean {:.2} sentences, {:.2} words",
        docs.len(),
        sents as f64 / n,
        words as f64 / n
    );
    Ok(())
}

fn read_report(arg: &str) -> Result<(String, EvalReport)> {
    let (name, path) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--compare expects NAME=FILE, got `{arg}`")))?;
    let path = Path::new(path);
    let text = fs::read_to_string(path).map_err(|e| sumstate::Error::io(path, e))?;
    let report = serde_json::from_str(&text).map_err(|e| sumstate::Error::MalformedRecord {
        path: path.to_owned(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok((name.to_owned(), report))
}

pub fn evaluate(cfg: &RunConfig, others: &[String], csv: Option<&Path>) -> Result<()> {
    let out = require(&cfg.out, "out")?;
    let docs = read_corpus(require(&cfg.corpus, "corpus")?, cfg.strict)?;
    let summaries = load_summaries(require(&cfg.summaries, "summaries")?, &docs)?;
    let report = pool(cfg.workers)?.install(|| evaluate_with(&docs, &summaries, cfg.bin_width))?;
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(sumstate::Error::from)?;
    w.write_all(b"\n").map_err(|e| sumstate::Error::io(out, e))?;
    finish(w, out)?;

    let mut systems = vec![(cfg.name.clone(), report)];
    for arg in others {
        systems.push(read_report(arg)?);
    }
    let table = compare(&systems)?;
    print!("{}", table.to_text());
    if let Some(path) = csv {
        fs::write(path, table.to_csv()).map_err(|e| sumstate::Error::io(path, e))?;
    }
    match &systems[0].1.pearson_length {
        Some(r) => println!("length correlation: {r:.4}"),
        None => println!(
            "length correlation: undefined ({})",
            systems[0].1.pearson_note.as_deref().unwrap_or("")
        ),
    }
    Ok(())
}

fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| sumstate::Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect())
}

pub fn rouge(candidate: &Path, reference: &Path) -> Result<()> {
    let t = RougeTriple::score(&read_sentences(candidate)?, &read_sentences(reference)?);
    println!("R1 {:.6}  R2 {:.6}  RL {:.6}", t.r1, t.r2, t.rl);
    Ok(())
}
