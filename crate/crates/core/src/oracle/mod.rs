//! Oracle labels: which sentences (and which words inside them) a summary should keep.
//!
//! - [`extractive_oracle`]: best subset of a top-`p` candidate pool, scored by mean R1/R2/RL F1.
//! - [`compressive_oracle`]: beam search over sentences and span deletions, scored incrementally
//!   by avg(R1, R2) F1.
//! - [`bow_oracle`]: keeps exactly the words licensed by the reference's bag of words.

mod compressive;
mod extractive;
mod spans;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use std::io::Write;
use std::path::Path;

use crate::corpus::{read_aligned, Document, Summary, SummarySentence};
use crate::rouge::{normalize, RougeTriple};
use crate::{Error, Result};

pub use compressive::{compressive_oracle, CompressiveParams};
pub use extractive::{extractive_oracle, extractive_oracle_with};
pub use spans::{heuristic_spans, sentence_spans, CompressionSpans, Span};

pub const DEFAULT_POOL: usize = 10;
pub const DEFAULT_BEAM: usize = 32;
pub const DEFAULT_MAX_SENTS: usize = 7;
pub const DEFAULT_SPAN_CAP: usize = 12;

/// The quantity an oracle maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// Mean of ROUGE-1, ROUGE-2 and ROUGE-L F1.
    #[serde(rename = "mean-r1r2rl")]
    MeanR1R2RL,
    /// Mean of ROUGE-1 and ROUGE-2 F1.
    #[serde(rename = "avg-r1r2")]
    AvgR1R2,
    #[serde(rename = "bow")]
    Bow,
}

impl Objective {
    pub fn of(&self, triple: &RougeTriple) -> f64 {
        match self {
            Objective::MeanR1R2RL => triple.mean(),
            Objective::AvgR1R2 | Objective::Bow => triple.avg_r1_r2(),
        }
    }
}

/// Which oracle to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleKind {
    Extractive,
    Compressive,
    Bow,
}

impl FromStr for OracleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "extractive" => Ok(OracleKind::Extractive),
            "compressive" => Ok(OracleKind::Compressive),
            "bow" => Ok(OracleKind::Bow),
            other => Err(format!(
                "unknown objective `{other}` (expected extractive, compressive or bow)"
            )),
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Extractive => "extractive",
            OracleKind::Compressive => "compressive",
            OracleKind::Bow => "bow",
        })
    }
}

/// Sentence bits `z`, word bits `y` and the objective value they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLabels {
    pub z: Vec<bool>,
    pub y: Vec<Vec<bool>>,
    pub score: f64,
    pub objective: Objective,
}

impl OracleLabels {
    /// Whole-sentence labels for the given (ascending) selection.
    pub fn from_selection(doc: &Document, selected: &[usize], score: f64, objective: Objective) -> Self {
        let mut z = vec![false; doc.num_sentences()];
        let mut y: Vec<Vec<bool>> = doc.sentences.iter().map(|s| vec![false; s.len()]).collect();
        for &i in selected {
            z[i] = true;
            y[i].fill(true);
        }
        OracleLabels {
            z,
            y,
            score,
            objective,
        }
    }

    pub fn selected(&self) -> Vec<usize> {
        self.z
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn num_selected(&self) -> usize {
        self.z.iter().filter(|&&b| b).count()
    }

    /// The summary these labels describe. Selected sentences that keep no word are left out.
    pub fn summary(&self) -> Summary {
        Summary {
            sentences: self
                .z
                .iter()
                .zip(&self.y)
                .enumerate()
                .filter(|(_, (&z, _))| z)
                .filter_map(|(index, (_, y))| {
                    let kept: Vec<usize> = y.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect();
                    (!kept.is_empty()).then_some(SummarySentence { index, kept })
                })
                .collect(),
        }
    }

    /// Checks that the bit arrays match the document's shape.
    pub fn check_shape(&self, doc: &Document) -> Result<()> {
        let mismatch = |message: String| Error::LabelMismatch {
            id: doc.id.clone(),
            message,
        };
        if self.z.len() != doc.num_sentences() || self.y.len() != doc.num_sentences() {
            return Err(mismatch(format!(
                "{} sentence labels for {} sentences",
                self.z.len(),
                doc.num_sentences()
            )));
        }
        for (i, (y, s)) in self.y.iter().zip(&doc.sentences).enumerate() {
            if y.len() != s.len() {
                return Err(mismatch(format!(
                    "sentence {i}: {} word labels for {} tokens",
                    y.len(),
                    s.len()
                )));
            }
        }
        Ok(())
    }

    /// Shape plus the structural invariants: unselected sentences carry all-zero word bits,
    /// extractive labels keep whole sentences, compressive labels are uniform inside each span
    /// and keep every token outside spans.
    pub fn check_invariants(&self, doc: &Document, spans: Option<&CompressionSpans>) -> Result<()> {
        self.check_shape(doc)?;
        let bad = |message: String| Error::LabelMismatch {
            id: doc.id.clone(),
            message,
        };
        for (i, (&z, y)) in self.z.iter().zip(&self.y).enumerate() {
            if !z {
                if y.iter().any(|&b| b) {
                    return Err(bad(format!("sentence {i} unselected but has kept words")));
                }
                continue;
            }
            match self.objective {
                Objective::MeanR1R2RL => {
                    if !y.iter().all(|&b| b) {
                        return Err(bad(format!("extractive sentence {i} drops words")));
                    }
                }
                Objective::AvgR1R2 => {
                    let sp = spans.map_or(&[][..], |s| s.sentence(i));
                    for (j, &b) in y.iter().enumerate() {
                        if !b && !sp.iter().any(|s| s.contains(j)) {
                            return Err(bad(format!("sentence {i}: word {j} dropped outside any span")));
                        }
                    }
                    for s in sp {
                        if y[s.start..s.end].iter().any(|&b| b != y[s.start]) {
                            return Err(bad(format!(
                                "sentence {i}: span [{}, {}) partially kept",
                                s.start, s.end
                            )));
                        }
                    }
                }
                Objective::Bow => {}
            }
        }
        Ok(())
    }

    pub fn to_record(&self, id: &str) -> LabelRecord {
        let bits = |v: &[bool]| v.iter().map(|&b| u8::from(b)).collect();
        LabelRecord {
            id: id.to_owned(),
            z: bits(&self.z),
            y: self.y.iter().map(|y| bits(y)).collect(),
            score: self.score,
            objective: self.objective,
        }
    }
}

/// One line of a label file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRecord {
    pub id: String,
    pub z: Vec<u8>,
    pub y: Vec<Vec<u8>>,
    pub score: f64,
    pub objective: Objective,
}

impl LabelRecord {
    pub fn into_labels(self) -> Result<OracleLabels> {
        let bit = |b: u8| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::LabelMismatch {
                id: self.id.clone(),
                message: format!("label value {other} is not a bit"),
            }),
        };
        Ok(OracleLabels {
            z: self.z.iter().map(|&b| bit(b)).collect::<Result<_>>()?,
            y: self
                .y
                .iter()
                .map(|y| y.iter().map(|&b| bit(b)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
            score: self.score,
            objective: self.objective,
        })
    }
}

pub fn write_labels<W: Write>(docs: &[Document], labels: &[OracleLabels], mut w: W) -> Result<()> {
    for (doc, l) in docs.iter().zip(labels) {
        serde_json::to_writer(&mut w, &l.to_record(&doc.id))?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Labels in corpus order, each checked against its document's shape.
pub fn load_labels(path: impl AsRef<Path>, docs: &[Document]) -> Result<Vec<OracleLabels>> {
    let records: Vec<LabelRecord> = read_aligned(path, docs, |r: &LabelRecord| &r.id)?;
    records
        .into_iter()
        .zip(docs)
        .map(|(r, doc)| {
            let labels = r.into_labels()?;
            labels.check_shape(doc)?;
            Ok(labels)
        })
        .collect()
}

/// Keeps a word iff its lowercased form is still available in the reference's bag of words;
/// each reference occurrence licenses one kept document occurrence, in document order.
pub fn bow_oracle(doc: &Document) -> OracleLabels {
    let mut budget: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for s in &doc.reference {
        for t in normalize(s.tokens()) {
            *budget.entry(t).or_default() += 1;
        }
    }
    let y: Vec<Vec<bool>> = doc
        .sentences
        .iter()
        .map(|s| {
            normalize(s.tokens())
                .into_iter()
                .map(|t| match budget.get_mut(&t) {
                    Some(n) if *n > 0 => {
                        *n -= 1;
                        true
                    }
                    _ => false,
                })
                .collect()
        })
        .collect();
    let z: Vec<bool> = y.iter().map(|y| y.iter().any(|&b| b)).collect();
    let mut labels = OracleLabels {
        z,
        y,
        score: 0.0,
        objective: Objective::Bow,
    };
    let summary = labels.summary();
    labels.score = RougeTriple::score(&summary.tokens(doc), &doc.reference_tokens()).avg_r1_r2();
    labels
}
