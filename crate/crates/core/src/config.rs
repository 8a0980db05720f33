//! Run configuration: a flat `key = value` text format shared by the config file and the
//! command-line flags. Later assignments override earlier ones; unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use crate::model::{Mode, ModelConfig, StateVariant};
use crate::oracle::{
    CompressiveParams, OracleKind, DEFAULT_BEAM, DEFAULT_MAX_SENTS, DEFAULT_POOL, DEFAULT_SPAN_CAP,
};
use crate::{Error, Result};

/// How `summarize` produces summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryMethod {
    Model,
    Lead,
    Labels,
}

impl std::str::FromStr for SummaryMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "model" => Ok(SummaryMethod::Model),
            "lead" => Ok(SummaryMethod::Lead),
            "labels" => Ok(SummaryMethod::Labels),
            other => Err(format!(
                "unknown method `{other}` (expected model, lead or labels)"
            )),
        }
    }
}

/// Every key, its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("corpus", "", "corpus file (newline-delimited records)"),
    ("labels", "", "label file aligned with the corpus by id"),
    ("out", "", "output path"),
    ("checkpoint", "", "model checkpoint"),
    ("summaries", "", "summaries file"),
    ("validation", "", "validation corpus evaluated after every epoch"),
    ("validation_labels", "", "labels for the validation corpus"),
    ("log", "", "training log (newline-delimited records)"),
    ("strict", "false", "abort on the first invalid corpus record"),
    (
        "objective",
        "extractive",
        "oracle: extractive | compressive | bow",
    ),
    ("pool", "10", "extractive oracle: candidate pool size p"),
    ("max_len", "3", "extractive oracle: maximum sentences m"),
    ("beam", "32", "compressive oracle: beam width (0 = unbounded)"),
    ("max_sents", "7", "compressive oracle: maximum selected sentences"),
    ("span_cap", "12", "compressive oracle: maximum spans per sentence"),
    ("seed", "13", "random seed"),
    ("workers", "1", "worker threads for oracle and evaluate"),
    ("embed_dim", "32", "word embedding size"),
    ("hidden_dim", "32", "LSTM hidden size d"),
    ("lambda_s0", "2", "sentence loss weight, class 0"),
    ("lambda_s1", "1", "sentence loss weight, class 1"),
    ("lambda_w0", "1", "word loss weight, class 0"),
    ("lambda_w1", "0.5", "word loss weight, class 1"),
    ("learning_rate", "0.001", "Adam learning rate"),
    ("batch_size", "2", "documents per batch"),
    ("epochs", "5", "training epochs"),
    ("mode", "extractive", "model: extractive | compressive"),
    ("state_variant", "lstm", "summary state: lstm | averaging"),
    ("method", "model", "summarize: model | lead | labels"),
    ("lead", "3", "LEAD baseline sentence count"),
    ("bin_width", "10", "length histogram bin width"),
    ("name", "system", "system name in reports"),
];

pub fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _, _)| *k == key).map_or("", |(_, d, _)| d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub summaries: Option<PathBuf>,
    pub validation: Option<PathBuf>,
    pub validation_labels: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub strict: bool,
    pub objective: OracleKind,
    pub pool: usize,
    pub max_len: usize,
    pub beam: Option<usize>,
    pub max_sents: usize,
    pub span_cap: usize,
    pub workers: usize,
    pub model: ModelConfig,
    pub method: SummaryMethod,
    pub lead: usize,
    pub bin_width: usize,
    pub name: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            labels: None,
            out: None,
            checkpoint: None,
            summaries: None,
            validation: None,
            validation_labels: None,
            log: None,
            strict: false,
            objective: OracleKind::Extractive,
            pool: DEFAULT_POOL,
            max_len: 3,
            beam: Some(DEFAULT_BEAM),
            max_sents: DEFAULT_MAX_SENTS,
            span_cap: DEFAULT_SPAN_CAP,
            workers: 1,
            model: ModelConfig::default(),
            method: SummaryMethod::Model,
            lead: 3,
            bin_width: crate::eval::DEFAULT_BIN_WIDTH,
            name: "system".into(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key} = {value}: {e}")))
}

fn positive(key: &str, value: &str) -> Result<usize> {
    let v: usize = parse(key, value)?;
    if v == 0 {
        return Err(Error::Config(format!("{key} must be at least 1")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let path = || Some(PathBuf::from(value));
        match key {
            "corpus" => self.corpus = path(),
            "labels" => self.labels = path(),
            "out" => self.out = path(),
            "checkpoint" => self.checkpoint = path(),
            "summaries" => self.summaries = path(),
            "validation" => self.validation = path(),
            "validation_labels" => self.validation_labels = path(),
            "log" => self.log = path(),
            "strict" => self.strict = parse(key, value)?,
            "objective" => self.objective = parse(key, value)?,
            "pool" => self.pool = positive(key, value)?,
            "max_len" => self.max_len = positive(key, value)?,
            "beam" => {
                let n: usize = parse(key, value)?;
                self.beam = (n > 0).then_some(n);
            }
            "max_sents" => self.max_sents = positive(key, value)?,
            "span_cap" => self.span_cap = parse(key, value)?,
            "seed" => self.model.seed = parse(key, value)?,
            "workers" => self.workers = positive(key, value)?,
            "embed_dim" => self.model.embed_dim = positive(key, value)?,
            "hidden_dim" => self.model.hidden_dim = positive(key, value)?,
            "lambda_s0" => self.model.lambda_s0 = parse(key, value)?,
            "lambda_s1" => self.model.lambda_s1 = parse(key, value)?,
            "lambda_w0" => self.model.lambda_w0 = parse(key, value)?,
            "lambda_w1" => self.model.lambda_w1 = parse(key, value)?,
            "learning_rate" => self.model.learning_rate = parse(key, value)?,
            "batch_size" => self.model.batch_size = positive(key, value)?,
            "epochs" => self.model.epochs = parse(key, value)?,
            "mode" => self.model.mode = parse::<Mode>(key, value)?,
            "state_variant" => self.model.state_variant = parse::<StateVariant>(key, value)?,
            "method" => self.method = parse(key, value)?,
            "lead" => self.lead = positive(key, value)?,
            "bin_width" => self.bin_width = positive(key, value)?,
            "name" => self.name = value.to_owned(),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document. Blank lines and `#` comments are ignored; a key may
    /// also be written with dashes (`max-sents`).
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`", n + 1)));
            };
            let key = k.trim().replace('-', "_");
            self.set(&key, v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(Error::Config)
    }

    pub fn compressive_params(&self) -> CompressiveParams {
        CompressiveParams {
            beam: self.beam,
            max_sents: self.max_sents,
            max_spans: self.span_cap,
            seed: Some((self.pool, self.max_len)),
        }
    }

    /// The configuration as a `key = value` document that [`apply_text`](Self::apply_text)
    /// reads back to an equal value.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let m = &self.model;
        let entries: Vec<(&str, Option<String>)> = vec![
            ("corpus", path(&self.corpus)),
            ("labels", path(&self.labels)),
            ("out", path(&self.out)),
            ("checkpoint", path(&self.checkpoint)),
            ("summaries", path(&self.summaries)),
            ("validation", path(&self.validation)),
            ("validation_labels", path(&self.validation_labels)),
            ("log", path(&self.log)),
            ("strict", Some(self.strict.to_string())),
            ("objective", Some(self.objective.to_string())),
            ("pool", Some(self.pool.to_string())),
            ("max_len", Some(self.max_len.to_string())),
            ("beam", Some(self.beam.unwrap_or(0).to_string())),
            ("max_sents", Some(self.max_sents.to_string())),
            ("span_cap", Some(self.span_cap.to_string())),
            ("seed", Some(m.seed.to_string())),
            ("workers", Some(self.workers.to_string())),
            ("embed_dim", Some(m.embed_dim.to_string())),
            ("hidden_dim", Some(m.hidden_dim.to_string())),
            ("lambda_s0", Some(m.lambda_s0.to_string())),
            ("lambda_s1", Some(m.lambda_s1.to_string())),
            ("lambda_w0", Some(m.lambda_w0.to_string())),
            ("lambda_w1", Some(m.lambda_w1.to_string())),
            ("learning_rate", Some(m.learning_rate.to_string())),
            ("batch_size", Some(m.batch_size.to_string())),
            ("epochs", Some(m.epochs.to_string())),
            ("mode", Some(m.mode.to_string())),
            ("state_variant", Some(m.state_variant.to_string())),
            ("method", Some(format!("{:?}", self.method).to_lowercase())),
            ("lead", Some(self.lead.to_string())),
            ("bin_width", Some(self.bin_width.to_string())),
            ("name", Some(self.name.clone())),
        ];
        entries
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k} = {v}\n")))
            .collect()
    }
}
