//! Pre-tokenized documents, the newline-delimited corpus format and the LEAD baseline.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::oracle::CompressionSpans;
use crate::{Error, Result};

/// A non-empty run of tokens. Tokens are stored with their original casing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Result<Self, String> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.is_empty() {
            return Err("empty sentence".into());
        }
        for (j, t) in tokens.iter().enumerate() {
            if t.is_empty() {
                return Err(format!("token {j} is empty"));
            }
            if t.chars().any(char::is_whitespace) {
                return Err(format!("token {j} ({t:?}) contains whitespace"));
            }
        }
        Ok(Sentence { tokens })
    }

    /// Splits on whitespace; `None` when the text has no tokens.
    pub fn from_text(text: &str) -> Option<Self> {
        let tokens: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
        (!tokens.is_empty()).then_some(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn truncate(&mut self, n: usize) {
        self.tokens.truncate(n);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub reference: Vec<Sentence>,
    pub spans: Option<CompressionSpans>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        sentences: Vec<Sentence>,
        reference: Vec<Sentence>,
    ) -> Result<Self, String> {
        let doc = Document {
            id: id.into(),
            sentences,
            reference,
            spans: None,
        };
        doc.check()?;
        Ok(doc)
    }

    /// Builds a document from whitespace-tokenized lines.
    pub fn from_lines(id: &str, sentences: &[&str], reference: &[&str]) -> Result<Self, String> {
        let parse = |lines: &[&str]| -> Vec<Sentence> {
            lines.iter().filter_map(|l| Sentence::from_text(l)).collect()
        };
        Document::new(id, parse(sentences), parse(reference))
    }

    pub fn with_spans(mut self, spans: CompressionSpans) -> Result<Self, String> {
        spans.validate(&self)?;
        self.spans = Some(spans);
        Ok(self)
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn reference_tokens(&self) -> Vec<&[String]> {
        self.reference.iter().map(Sentence::tokens).collect()
    }

    pub fn reference_word_count(&self) -> usize {
        self.reference.iter().map(Sentence::len).sum()
    }

    fn check(&self) -> Result<(), String> {
        if self.sentences.is_empty() {
            return Err("document has no sentences".into());
        }
        if self.reference.is_empty() {
            return Err("reference summary has no sentences".into());
        }
        if let Some(spans) = &self.spans {
            spans.validate(self)?;
        }
        Ok(())
    }

    fn truncate(&mut self, limits: &CorpusLimits) -> bool {
        let mut truncated = false;
        if self.sentences.len() > limits.max_sentences {
            self.sentences.truncate(limits.max_sentences);
            truncated = true;
        }
        for s in &mut self.sentences {
            if s.len() > limits.max_tokens {
                s.truncate(limits.max_tokens);
                truncated = true;
            }
        }
        if truncated {
            if let Some(spans) = &mut self.spans {
                spans.restrict_to(&self.sentences);
            }
        }
        truncated
    }

    pub fn to_record(&self) -> Record {
        let lists = |ss: &[Sentence]| ss.iter().map(|s| s.tokens.clone()).collect();
        Record {
            id: self.id.clone(),
            sentences: lists(&self.sentences),
            summary: lists(&self.reference),
            spans: self.spans.as_ref().map(CompressionSpans::to_pairs),
        }
    }

    pub fn from_record(record: Record) -> Result<Self, String> {
        let sentences = sentences_from_lists(record.sentences, "sentence")?;
        let reference = sentences_from_lists(record.summary, "summary sentence")?;
        let mut doc = Document {
            id: record.id,
            sentences,
            reference,
            spans: None,
        };
        doc.check()?;
        if let Some(pairs) = record.spans {
            doc.spans = Some(CompressionSpans::from_pairs(pairs));
            doc.check()?;
        }
        Ok(doc)
    }
}

fn sentences_from_lists(lists: Vec<Vec<String>>, what: &str) -> Result<Vec<Sentence>, String> {
    lists
        .into_iter()
        .enumerate()
        .map(|(i, toks)| Sentence::new(toks).map_err(|e| format!("{what} {i}: {e}")))
        .collect()
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub id: String,
    pub sentences: Vec<Vec<String>>,
    pub summary: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spans: Option<Vec<Vec<[usize; 2]>>>,
}

/// Size caps applied at load time; longer documents are truncated with a warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusLimits {
    pub max_sentences: usize,
    pub max_tokens: usize,
}

impl Default for CorpusLimits {
    fn default() -> Self {
        CorpusLimits {
            max_sentences: 200,
            max_tokens: 200,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    /// Records dropped in lenient mode.
    pub skipped: usize,
    pub truncated: usize,
}

pub fn load_corpus(path: impl AsRef<Path>, strict: bool) -> Result<LoadedCorpus> {
    load_corpus_with(path, strict, CorpusLimits::default())
}

pub fn load_corpus_with(path: impl AsRef<Path>, strict: bool, limits: CorpusLimits) -> Result<LoadedCorpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path, strict, limits)
}

pub fn parse_corpus(text: &str, path: &Path, strict: bool, limits: CorpusLimits) -> Result<LoadedCorpus> {
    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            path: path.to_owned(),
            line: line_no,
            message: e.to_string(),
        })?;
        let id = record.id.clone();
        let mut doc = match Document::from_record(record) {
            Ok(doc) => doc,
            Err(message) if strict => {
                return Err(Error::InvalidDocument {
                    id,
                    line: line_no,
                    message,
                })
            }
            Err(message) => {
                log::warn!("skipping record `{id}` (line {line_no}): {message}");
                out.skipped += 1;
                continue;
            }
        };
        if !seen.insert(doc.id.clone()) {
            if strict {
                return Err(Error::DuplicateId(doc.id));
            }
            log::warn!("skipping duplicate id `{}` (line {line_no})", doc.id);
            out.skipped += 1;
            continue;
        }
        if doc.truncate(&limits) {
            log::warn!(
                "document `{}` truncated to {} sentences of at most {} tokens",
                doc.id,
                limits.max_sentences,
                limits.max_tokens
            );
            out.truncated += 1;
        }
        out.documents.push(doc);
    }
    Ok(out)
}

pub fn write_corpus<W: Write>(docs: &[Document], mut w: W) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut w, &doc.to_record())?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Reads a newline-delimited file of records keyed by document id and returns them in corpus
/// order. Every document must have exactly one record; records for unknown ids are ignored.
pub fn read_aligned<T: DeserializeOwned>(
    path: impl AsRef<Path>,
    docs: &[Document],
    id_of: impl Fn(&T) -> &str,
) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut by_id: HashMap<String, T> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            path: path.to_owned(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        let id = id_of(&record).to_owned();
        if by_id.insert(id.clone(), record).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    let mut out = Vec::with_capacity(docs.len());
    for doc in docs {
        let record = by_id.remove(&doc.id).ok_or_else(|| {
            Error::Misaligned(format!(
                "{} has no record for document `{}`",
                path.display(),
                doc.id
            ))
        })?;
        out.push(record);
    }
    if !by_id.is_empty() {
        log::warn!(
            "{}: {} records match no corpus document",
            path.display(),
            by_id.len()
        );
    }
    Ok(out)
}

/// One line of a summaries file. `text` is the realized summary, for reading only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub id: String,
    pub sentences: Vec<SummarySentence>,
    #[serde(default)]
    pub text: String,
}

pub fn write_summaries<W: Write>(docs: &[Document], summaries: &[Summary], mut w: W) -> Result<()> {
    for (doc, summary) in docs.iter().zip(summaries) {
        serde_json::to_writer(&mut w, &summary.to_record(doc))?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Summaries in corpus order, each checked against its document.
pub fn load_summaries(path: impl AsRef<Path>, docs: &[Document]) -> Result<Vec<Summary>> {
    let records: Vec<SummaryRecord> = read_aligned(path, docs, |r: &SummaryRecord| &r.id)?;
    records
        .into_iter()
        .zip(docs)
        .map(|(r, doc)| {
            let summary = Summary {
                sentences: r.sentences,
            };
            summary.validate(doc)?;
            Ok(summary)
        })
        .collect()
}

/// One sentence of a summary: its index in the source document and the kept token positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarySentence {
    pub index: usize,
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub sentences: Vec<SummarySentence>,
}

impl Summary {
    /// Keeps every token of the given sentences.
    pub fn from_sentences(doc: &Document, indices: impl IntoIterator<Item = usize>) -> Self {
        Summary {
            sentences: indices
                .into_iter()
                .map(|index| SummarySentence {
                    index,
                    kept: (0..doc.sentences[index].len()).collect(),
                })
                .collect(),
        }
    }

    /// Shared validator for every summary the system produces.
    pub fn validate(&self, doc: &Document) -> Result<()> {
        let mut prev: Option<usize> = None;
        for s in &self.sentences {
            if prev.is_some_and(|p| p >= s.index) {
                return Err(Error::InvalidSummary(format!(
                    "sentence indices not strictly ascending at {}",
                    s.index
                )));
            }
            prev = Some(s.index);
            let Some(sentence) = doc.sentences.get(s.index) else {
                return Err(Error::InvalidSummary(format!(
                    "sentence index {} out of range for `{}` ({} sentences)",
                    s.index,
                    doc.id,
                    doc.num_sentences()
                )));
            };
            if s.kept.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSummary(format!(
                    "kept tokens of sentence {} not strictly ascending",
                    s.index
                )));
            }
            if s.kept.last().is_some_and(|&j| j >= sentence.len()) {
                return Err(Error::InvalidSummary(format!(
                    "kept token out of range in sentence {}",
                    s.index
                )));
            }
        }
        Ok(())
    }

    /// Realized text, one token list per summary sentence.
    pub fn tokens<'d>(&self, doc: &'d Document) -> Vec<Vec<&'d str>> {
        self.sentences
            .iter()
            .map(|s| {
                let toks = doc.sentences[s.index].tokens();
                s.kept.iter().map(|&j| toks[j].as_str()).collect()
            })
            .collect()
    }

    pub fn to_record(&self, doc: &Document) -> SummaryRecord {
        SummaryRecord {
            id: doc.id.clone(),
            sentences: self.sentences.clone(),
            text: self
                .tokens(doc)
                .iter()
                .map(|t| t.join(" "))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }

    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(|s| s.kept.len()).sum()
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }
}

/// The first `min(m, M)` sentences, every token kept.
///
/// # Panics
/// If `m == 0`.
pub fn lead_baseline(doc: &Document, m: usize) -> Summary {
    assert!(m >= 1, "LEAD needs m >= 1");
    Summary::from_sentences(doc, 0..m.min(doc.num_sentences()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn doc(m: usize) -> Document {
        let lines: Vec<String> = (0..m).map(|i| format!("sentence number {i}")).collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        Document::from_lines("d", &refs, &["a summary"]).unwrap()
    }

    fn parse(text: &str, strict: bool) -> Result<LoadedCorpus> {
        parse_corpus(text, &PathBuf::from("mem.jsonl"), strict, CorpusLimits::default())
    }

    #[test]
    fn one_record_two_sentences() {
        let c = parse(
            r#"{"id":"a","sentences":[["The","cat"],["It","sat","."]],"summary":[["cat","sat"]]}"#,
            true,
        )
        .unwrap();
        assert_eq!(c.documents.len(), 1);
        assert_eq!(c.documents[0].num_sentences(), 2);
        assert_eq!(c.documents[0].sentences[0].tokens()[0], "The");
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let c = parse("", true).unwrap();
        assert!(c.documents.is_empty());
        assert_eq!(c.skipped, 0);
    }

    #[test]
    fn empty_sentence_strict_names_record() {
        let text = r#"{"id":"bad-doc","sentences":[["a"],[]],"summary":[["a"]]}"#;
        let err = parse(text, true).unwrap_err();
        assert!(err.to_string().contains("bad-doc"), "{err}");
        let lenient = parse(text, false).unwrap();
        assert!(lenient.documents.is_empty());
        assert_eq!(lenient.skipped, 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"id\":\"a\",\"sentences\":[[\"x\"]],\"summary\":[[\"x\"]]}\n{not json";
        let err = parse(text, false).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_ids() {
        let line = r#"{"id":"a","sentences":[["x"]],"summary":[["x"]]}"#;
        let text = format!("{line}\n{line}\n");
        assert!(matches!(parse(&text, true), Err(Error::DuplicateId(_))));
        let lenient = parse(&text, false).unwrap();
        assert_eq!(lenient.documents.len(), 1);
        assert_eq!(lenient.skipped, 1);
    }

    #[test]
    fn whitespace_token_rejected() {
        assert!(Sentence::new(["a b"]).is_err());
        assert!(Sentence::new([""]).is_err());
    }

    #[test]
    fn truncation_applies_limits() {
        let text =
            r#"{"id":"a","sentences":[["a","b","c"],["d"],["e"]],"summary":[["x"]],"spans":[[[1,3]],[],[]]}"#;
        let limits = CorpusLimits {
            max_sentences: 2,
            max_tokens: 2,
        };
        let c = parse_corpus(text, Path::new("m"), true, limits).unwrap();
        let d = &c.documents[0];
        assert_eq!(d.num_sentences(), 2);
        assert_eq!(d.sentences[0].len(), 2);
        assert_eq!(c.truncated, 1);
        // the span [1,3) no longer fits and is dropped
        assert!(d.spans.as_ref().unwrap().sentence(0).is_empty());
    }

    #[test]
    fn lead_examples() {
        let s = lead_baseline(&doc(5), 3);
        assert_eq!(s.sentences.iter().map(|s| s.index).collect::<Vec<_>>(), [0, 1, 2]);
        assert!(s.sentences.iter().all(|s| s.kept == [0, 1, 2]));
        assert_eq!(lead_baseline(&doc(1), 2).num_sentences(), 1);
        assert_eq!(lead_baseline(&doc(4), 2).num_sentences(), 2);
    }

    #[test]
    fn summary_validator() {
        let d = doc(3);
        let bad_order = Summary {
            sentences: vec![
                SummarySentence {
                    index: 1,
                    kept: vec![0],
                },
                SummarySentence {
                    index: 0,
                    kept: vec![0],
                },
            ],
        };
        assert!(bad_order.validate(&d).is_err());
        let bad_token = Summary {
            sentences: vec![SummarySentence {
                index: 0,
                kept: vec![0, 7],
            }],
        };
        assert!(bad_token.validate(&d).is_err());
        let bad_index = Summary {
            sentences: vec![SummarySentence {
                index: 9,
                kept: vec![],
            }],
        };
        assert!(bad_index.validate(&d).is_err());
        assert!(lead_baseline(&d, 2).validate(&d).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn token() -> impl Strategy<Value = String> {
            "[a-zA-Z0-9'.,()ä]{1,6}"
        }

        fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
            prop::collection::vec(prop::collection::vec(token(), 1..6), 1..5)
        }

        proptest! {
            #[test]
            fn round_trip(docs in prop::collection::vec((sentences(), sentences()), 0..4)) {
                let docs: Vec<Document> = docs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (s, r))| {
                        Document::from_record(Record { id: format!("doc{i}"), sentences: s, summary: r, spans: None }).unwrap()
                    })
                    .collect();
                let mut buf = Vec::new();
                write_corpus(&docs, &mut buf).unwrap();
                let back = parse(std::str::from_utf8(&buf).unwrap(), true).unwrap();
                prop_assert_eq!(back.documents, docs);
            }

            #[test]
            fn lead_length(m in 1usize..12, len in 1usize..10) {
                prop_assert_eq!(lead_baseline(&doc(len), m).num_sentences(), m.min(len));
            }
        }
    }
}
