use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Sentence};

/// A deletable token range `[start, end)` inside one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, j: usize) -> bool {
        self.start <= j && j < self.end
    }

    fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Per-sentence deletable spans, sorted by start and pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompressionSpans {
    sentences: Vec<Vec<Span>>,
}

impl CompressionSpans {
    pub fn new(sentences: Vec<Vec<Span>>) -> Self {
        CompressionSpans { sentences }
    }

    /// No spans in any of `m` sentences.
    pub fn empty(m: usize) -> Self {
        CompressionSpans {
            sentences: vec![Vec::new(); m],
        }
    }

    pub fn from_pairs(pairs: Vec<Vec<[usize; 2]>>) -> Self {
        CompressionSpans {
            sentences: pairs
                .into_iter()
                .map(|s| s.into_iter().map(|[a, b]| Span::new(a, b)).collect())
                .collect(),
        }
    }

    pub fn to_pairs(&self) -> Vec<Vec<[usize; 2]>> {
        self.sentences
            .iter()
            .map(|s| s.iter().map(|sp| [sp.start, sp.end]).collect())
            .collect()
    }

    pub fn sentence(&self, i: usize) -> &[Span] {
        self.sentences.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.iter().all(Vec::is_empty)
    }

    pub fn validate(&self, doc: &Document) -> Result<(), String> {
        if self.sentences.len() != doc.num_sentences() {
            return Err(format!(
                "spans list {} sentences, document has {}",
                self.sentences.len(),
                doc.num_sentences()
            ));
        }
        for (i, (spans, sentence)) in self.sentences.iter().zip(&doc.sentences).enumerate() {
            for (k, sp) in spans.iter().enumerate() {
                if sp.start >= sp.end || sp.end > sentence.len() {
                    return Err(format!(
                        "sentence {i}: span [{}, {}) outside a {}-token sentence",
                        sp.start,
                        sp.end,
                        sentence.len()
                    ));
                }
                if k > 0 && spans[k - 1].end > sp.start {
                    return Err(format!(
                        "sentence {i}: spans overlap or are unsorted at [{}, {})",
                        sp.start, sp.end
                    ));
                }
            }
        }
        Ok(())
    }

    /// Drops sentences and spans that no longer fit after truncation.
    pub(crate) fn restrict_to(&mut self, sentences: &[Sentence]) {
        self.sentences.truncate(sentences.len());
        self.sentences.resize(sentences.len(), Vec::new());
        for (spans, s) in self.sentences.iter_mut().zip(sentences) {
            spans.retain(|sp| sp.end <= s.len());
        }
    }
}

const OPEN: [&str; 2] = ["(", "-LRB-"];
const CLOSE: [&str; 2] = [")", "-RRB-"];
const CONNECTIVES: [&str; 5] = ["who", "which", "where", "when", "according"];
const DATELINE_WINDOW: usize = 6;

fn parenthesized(tokens: &[String]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut j = 0;
    while j < tokens.len() {
        if OPEN.contains(&tokens[j].as_str()) {
            if let Some(k) = (j + 1..tokens.len()).find(|&k| CLOSE.contains(&tokens[k].as_str())) {
                out.push(Span::new(j, k + 1));
                j = k + 1;
                continue;
            }
        }
        j += 1;
    }
    out
}

fn comma_clauses(tokens: &[String]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut j = 0;
    while j + 1 < tokens.len() {
        let opens = tokens[j] == "," && CONNECTIVES.contains(&tokens[j + 1].to_lowercase().as_str());
        if opens {
            if let Some(k) = (j + 2..tokens.len()).find(|&k| tokens[k] == ",") {
                out.push(Span::new(j, k + 1));
                j = k + 1;
                continue;
            }
        }
        j += 1;
    }
    out
}

fn dateline(tokens: &[String]) -> Option<Span> {
    tokens
        .iter()
        .take(DATELINE_WINDOW)
        .position(|t| CLOSE.contains(&t.as_str()))
        .map(|k| Span::new(0, k + 1))
}

/// Rule-marked deletable spans for one sentence.
///
/// Rules, in priority order: parenthesized runs (parentheses included); comma-delimited clauses
/// opened by a connective (`who`, `which`, `where`, `when`, `according`); a leading dateline
/// ending in a closing parenthesis within the first six tokens. A span overlapping one from an
/// earlier rule is discarded.
pub fn sentence_spans(tokens: &[String]) -> Vec<Span> {
    let mut spans = parenthesized(tokens);
    for sp in comma_clauses(tokens).into_iter().chain(dateline(tokens)) {
        if !spans.iter().any(|s| s.overlaps(&sp)) {
            spans.push(sp);
        }
    }
    spans.sort();
    spans
}

pub fn heuristic_spans(doc: &Document) -> CompressionSpans {
    CompressionSpans::new(doc.sentences.iter().map(|s| sentence_spans(s.tokens())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans_of(text: &str) -> Vec<Span> {
        let toks: Vec<String> = text.split_whitespace().map(String::from).collect();
        sentence_spans(&toks)
    }

    #[test]
    fn dateline_rule() {
        assert_eq!(spans_of("( CNN ) A top leader died"), [Span::new(0, 3)]);
        assert_eq!(
            spans_of("LONDON , England -LRB- Reuters -RRB- officials said"),
            [Span::new(3, 6)]
        );
        assert_eq!(spans_of("LONDON Reuters ) officials said"), [Span::new(0, 3)]);
        // closing parenthesis too far in
        assert!(spans_of("a b c d e f ) g").is_empty());
    }

    #[test]
    fn no_trigger_no_spans() {
        assert!(spans_of("the cat sat on the mat").is_empty());
        assert!(spans_of("the man , who was 91 died").is_empty());
    }

    #[test]
    fn connective_clause() {
        assert_eq!(spans_of("the man , who was 91 , died"), [Span::new(2, 7)]);
        assert_eq!(
            spans_of("it rained , According to police , and ( sadly ) ended"),
            [Span::new(2, 7), Span::new(8, 11)]
        );
    }

    #[test]
    fn earlier_rule_wins() {
        // the comma clause overlaps the parenthesized run and is discarded
        assert_eq!(spans_of("x , which ( is , odd ) y"), [Span::new(3, 8)]);
    }

    #[test]
    fn validation() {
        let doc = Document::from_lines("d", &["a b c", "d e"], &["a"]).unwrap();
        assert!(CompressionSpans::from_pairs(vec![vec![[0, 1], [1, 3]], vec![]])
            .validate(&doc)
            .is_ok());
        assert!(CompressionSpans::from_pairs(vec![vec![[0, 2], [1, 3]], vec![]])
            .validate(&doc)
            .is_err());
        assert!(CompressionSpans::from_pairs(vec![vec![[0, 4]], vec![]])
            .validate(&doc)
            .is_err());
        assert!(CompressionSpans::from_pairs(vec![vec![[1, 1]], vec![]])
            .validate(&doc)
            .is_err());
        assert!(CompressionSpans::from_pairs(vec![vec![]]).validate(&doc).is_err());
    }
}
