//! Corpus-level evaluation: ROUGE means, summary lengths, length correlation and histograms.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Summary};
use crate::rouge::{pearson, RougeTriple};
use crate::{Error, Result};

pub const DEFAULT_BIN_WIDTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub id: String,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
    pub system_words: usize,
    pub reference_words: usize,
}

/// Word-count histogram; bin `k` covers `[start + k·width, start + (k+1)·width)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: usize,
    pub start: usize,
    pub counts: Vec<usize>,
}

impl Histogram {
    fn over(values: &[usize], start: usize, bins: usize, bin_width: usize) -> Self {
        let mut counts = vec![0; bins];
        for &v in values {
            counts[(v - start) / bin_width] += 1;
        }
        Histogram {
            bin_width,
            start,
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub documents: Vec<DocumentScore>,
    pub mean_r1: f64,
    pub mean_r2: f64,
    pub mean_rl: f64,
    pub mean_system_words: f64,
    pub mean_reference_words: f64,
    /// Pearson correlation of system and reference word counts; `None` when undefined.
    pub pearson_length: Option<f64>,
    /// Why the correlation is undefined, if it is.
    pub pearson_note: Option<String>,
    /// System and reference histograms share bins spanning every observed length.
    pub system_histogram: Histogram,
    pub reference_histogram: Histogram,
}

impl EvalReport {
    pub fn mean_rouge(&self) -> f64 {
        (self.mean_r1 + self.mean_r2 + self.mean_rl) / 3.0
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn evaluate(corpus: &[Document], summaries: &[Summary]) -> Result<EvalReport> {
    evaluate_with(corpus, summaries, DEFAULT_BIN_WIDTH)
}

/// Scores each summary's realized text against its document's reference.
///
/// Summaries are aligned with the corpus by position. Documents are scored in parallel on the
/// current rayon pool; the result does not depend on the number of threads.
pub fn evaluate_with(corpus: &[Document], summaries: &[Summary], bin_width: usize) -> Result<EvalReport> {
    if corpus.len() != summaries.len() {
        return Err(Error::Misaligned(format!(
            "{} documents but {} summaries",
            corpus.len(),
            summaries.len()
        )));
    }
    if bin_width == 0 {
        return Err(Error::Config("histogram bin width must be at least 1".into()));
    }
    let documents: Vec<DocumentScore> = corpus
        .par_iter()
        .zip(summaries.par_iter())
        .map(|(doc, summary)| {
            summary.validate(doc)?;
            let t = RougeTriple::score(&summary.tokens(doc), &doc.reference_tokens());
            Ok(DocumentScore {
                id: doc.id.clone(),
                r1: t.r1,
                r2: t.r2,
                rl: t.rl,
                system_words: summary.word_count(),
                reference_words: doc.reference_word_count(),
            })
        })
        .collect::<Result<_>>()?;

    let sys: Vec<usize> = documents.iter().map(|d| d.system_words).collect();
    let refs: Vec<usize> = documents.iter().map(|d| d.reference_words).collect();
    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let (pearson_length, pearson_note) = match pearson(&as_f64(&sys), &as_f64(&refs)) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let lo = sys.iter().chain(&refs).min().copied().unwrap_or(0);
    let hi = sys.iter().chain(&refs).max().copied().unwrap_or(0);
    let start = lo / bin_width * bin_width;
    let bins = if documents.is_empty() {
        0
    } else {
        hi / bin_width - lo / bin_width + 1
    };

    Ok(EvalReport {
        mean_r1: mean(documents.iter().map(|d| d.r1)),
        mean_r2: mean(documents.iter().map(|d| d.r2)),
        mean_rl: mean(documents.iter().map(|d| d.rl)),
        mean_system_words: mean(sys.iter().map(|&x| x as f64)),
        mean_reference_words: mean(refs.iter().map(|&x| x as f64)),
        pearson_length,
        pearson_note,
        system_histogram: Histogram::over(&sys, start, bins, bin_width),
        reference_histogram: Histogram::over(&refs, start, bins, bin_width),
        documents,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub system: String,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
    pub mean_words: f64,
    pub documents: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// One row per named report, in the given order.
pub fn compare(reports: &[(String, EvalReport)]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(Error::Config("nothing to compare".into()));
    }
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(reports.len());
    for (name, r) in reports {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateSystem(name.clone()));
        }
        rows.push(ComparisonRow {
            system: name.clone(),
            r1: r.mean_r1,
            r2: r.mean_r2,
            rl: r.mean_rl,
            mean_words: r.mean_system_words,
            documents: r.documents.len(),
        });
    }
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    /// Aligned plain-text table; ROUGE values are F1 x 100.
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.system.len())
            .max()
            .unwrap_or(0)
            .max("system".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>7}  {:>5}",
            "system", "R1", "R2", "RL", "words", "docs"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6.2}  {:>6.2}  {:>6.2}  {:>7.1}  {:>5}",
                r.system,
                100.0 * r.r1,
                100.0 * r.r2,
                100.0 * r.rl,
                r.mean_words,
                r.documents
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("system,r1,r2,rl,mean_words,documents\n");
        for r in &self.rows {
            let name = if r.system.contains([',', '"', '\n']) {
                format!("\"{}\"", r.system.replace('"', "\"\""))
            } else {
                r.system.clone()
            };
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{}",
                r.r1, r.r2, r.rl, r.mean_words, r.documents
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::lead_baseline;
    use crate::rouge::{rouge_l, rouge_n};

    fn corpus() -> Vec<Document> {
        vec![
            Document::from_lines("a", &["the cat sat", "on the mat"], &["the cat sat on the mat"]).unwrap(),
            Document::from_lines("b", &["dogs bark loudly", "birds sing"], &["dogs bark"]).unwrap(),
            Document::from_lines(
                "c",
                &["rain fell all day", "roads flooded"],
                &["roads flooded after rain"],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn references_as_summaries_score_one() {
        let docs: Vec<Document> = corpus()
            .into_iter()
            .map(|mut d| {
                d.sentences = d.reference.clone();
                d
            })
            .collect();
        let sums: Vec<Summary> = docs.iter().map(|d| lead_baseline(d, 10)).collect();
        let r = evaluate(&docs, &sums).unwrap();
        assert_eq!((r.mean_r1, r.mean_r2, r.mean_rl), (1.0, 1.0, 1.0));
        // lengths 6, 2, 4 on both sides
        assert_eq!(r.pearson_length, Some(1.0));
    }

    #[test]
    fn single_document_correlation_is_undefined() {
        let docs = &corpus()[..1];
        let r = evaluate(docs, &[lead_baseline(&docs[0], 1)]).unwrap();
        assert_eq!(r.pearson_length, None);
        assert!(r.pearson_note.is_some());
    }

    #[test]
    fn means_match_hand_averages() {
        let docs = corpus();
        let sums: Vec<Summary> = docs.iter().map(|d| lead_baseline(d, 1)).collect();
        let r = evaluate(&docs, &sums).unwrap();
        // each LEAD-1 summary is a single sentence, so segmented and flat scoring agree
        let per: Vec<(f64, f64, f64)> = docs
            .iter()
            .map(|d| {
                let c = d.sentences[0].tokens();
                let reference = d.reference[0].tokens();
                (
                    rouge_n(c, reference, 1).f1,
                    rouge_n(c, reference, 2).f1,
                    rouge_l(c, reference).f1,
                )
            })
            .collect();
        let avg = |f: fn(&(f64, f64, f64)) -> f64| per.iter().map(f).sum::<f64>() / 3.0;
        assert!((r.mean_r1 - avg(|t| t.0)).abs() < 1e-15);
        assert!((r.mean_r2 - avg(|t| t.1)).abs() < 1e-15);
        assert!((r.mean_rl - avg(|t| t.2)).abs() < 1e-15);
        assert_eq!(
            r.documents.iter().map(|d| d.system_words).collect::<Vec<_>>(),
            [3, 3, 4]
        );
    }

    #[test]
    fn histogram_partitions_range() {
        let docs = corpus();
        let sums: Vec<Summary> = docs.iter().map(|d| lead_baseline(d, 2)).collect();
        let r = evaluate_with(&docs, &sums, 2).unwrap();
        assert_eq!(r.system_histogram.counts.iter().sum::<usize>(), 3);
        assert_eq!(r.reference_histogram.counts.iter().sum::<usize>(), 3);
        assert_eq!(r.system_histogram.start, 2);
        assert_eq!(
            r.system_histogram.counts.len(),
            r.reference_histogram.counts.len()
        );
    }

    #[test]
    fn misaligned_inputs() {
        assert!(matches!(evaluate(&corpus(), &[]), Err(Error::Misaligned(_))));
    }

    #[test]
    fn report_round_trips_and_is_repeatable() {
        let docs = corpus();
        let sums: Vec<Summary> = docs.iter().map(|d| lead_baseline(d, 1)).collect();
        let r = evaluate(&docs, &sums).unwrap();
        assert_eq!(evaluate(&docs, &sums).unwrap(), r);
        let back: EvalReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn comparison_tables() {
        let docs = corpus();
        let sums: Vec<Summary> = docs.iter().map(|d| lead_baseline(d, 1)).collect();
        let r = evaluate(&docs, &sums).unwrap();
        let one = compare(&[("lead".into(), r.clone())]).unwrap();
        assert_eq!(one.rows.len(), 1);
        let two = compare(&[("a".into(), r.clone()), ("b".into(), r.clone())]).unwrap();
        assert_eq!(
            (two.rows[0].r1, two.rows[0].r2, two.rows[0].rl),
            (two.rows[1].r1, two.rows[1].r2, two.rows[1].rl)
        );
        assert!(matches!(
            compare(&[("a".into(), r.clone()), ("a".into(), r)]),
            Err(Error::DuplicateSystem(_))
        ));
        assert!(two.to_text().lines().count() == 3);
        assert!(two.to_csv().starts_with("system,r1,r2,rl"));
    }
}
