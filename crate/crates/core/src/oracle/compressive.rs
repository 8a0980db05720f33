use std::cmp::Ordering;

use super::{
    extractive_oracle, CompressionSpans, Objective, OracleLabels, DEFAULT_BEAM, DEFAULT_MAX_SENTS,
    DEFAULT_POOL, DEFAULT_SPAN_CAP,
};
use crate::corpus::Document;
use crate::rouge::{OverlapState, Segment};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressiveParams {
    /// Hypotheses kept after each sentence; `None` keeps every hypothesis (exhaustive search).
    pub beam: Option<usize>,
    /// Cap on selected sentences per hypothesis.
    pub max_sents: usize,
    /// More spans than this in one sentence is an error (2^k deletion variants).
    pub max_spans: usize,
    /// `(p, m)` of an extractive selection that is always scored as a keep-everything candidate.
    pub seed: Option<(usize, usize)>,
}

impl Default for CompressiveParams {
    fn default() -> Self {
        CompressiveParams {
            beam: Some(DEFAULT_BEAM),
            max_sents: DEFAULT_MAX_SENTS,
            max_spans: DEFAULT_SPAN_CAP,
            seed: Some((DEFAULT_POOL, 3)),
        }
    }
}

struct Variant {
    /// Bit `k` set: span `k` of the sentence is deleted.
    mask: u32,
    kept: Vec<usize>,
    segment: Segment,
}

const ROOT: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    parent: u32,
    sentence: u32,
    variant: u32,
}

#[derive(Debug, Clone, Copy)]
struct Hyp {
    node: u32,
    count: u32,
    score: f64,
}

struct Search<'a> {
    variants: Vec<Vec<Variant>>,
    arena: Vec<Node>,
    state: OverlapState,
    _doc: &'a Document,
}

impl Search<'_> {
    /// Chosen `(sentence, variant)` pairs in document order.
    fn path(&self, mut node: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        while node != ROOT {
            let n = self.arena[node as usize];
            out.push((n.sentence, n.variant));
            node = n.parent;
        }
        out.reverse();
        out
    }

    fn path_key(&self, node: u32) -> Vec<(u32, u32)> {
        self.path(node)
            .into_iter()
            .map(|(i, v)| (i, self.variants[i as usize][v as usize].mask))
            .collect()
    }

    fn apply(&mut self, node: u32) {
        let mut n = node;
        while n != ROOT {
            let Node {
                parent,
                sentence,
                variant,
            } = self.arena[n as usize];
            self.state
                .add_segment(&self.variants[sentence as usize][variant as usize].segment);
            n = parent;
        }
    }

    fn retract(&mut self, node: u32) {
        let mut n = node;
        while n != ROOT {
            let Node {
                parent,
                sentence,
                variant,
            } = self.arena[n as usize];
            self.state
                .remove_segment(&self.variants[sentence as usize][variant as usize].segment)
                .expect("retracting a segment that was applied");
            n = parent;
        }
    }

    /// Higher score first, then fewer sentences, then the smaller `(sentence, mask)` sequence.
    fn rank(&self, a: &Hyp, b: &Hyp) -> Ordering {
        b.score
            .total_cmp(&a.score)
            .then(a.count.cmp(&b.count))
            .then_with(|| self.path_key(a.node).cmp(&self.path_key(b.node)))
    }

    fn push(&mut self, parent: u32, sentence: usize, variant: usize) -> u32 {
        self.arena.push(Node {
            parent,
            sentence: sentence as u32,
            variant: variant as u32,
        });
        (self.arena.len() - 1) as u32
    }
}

fn kept_tokens(len: usize, spans: &[super::Span], mask: u32) -> Vec<usize> {
    (0..len)
        .filter(|&j| {
            !spans
                .iter()
                .enumerate()
                .any(|(k, sp)| mask & (1 << k) != 0 && sp.contains(j))
        })
        .collect()
}

/// Best sentence selection with span deletions under avg(R1, R2) F1.
///
/// Sentences are visited in document order. Every hypothesis either skips the sentence or takes
/// one of its non-empty deletion variants; after each sentence only the `beam` best hypotheses
/// survive. Every hypothesis generated along the way is a complete candidate summary. Ties are
/// broken as in [`extractive_oracle`](super::extractive_oracle): fewer sentences, then the
/// lexicographically smallest `(sentence, deletion mask)` sequence.
pub fn compressive_oracle(
    doc: &Document,
    spans: &CompressionSpans,
    params: &CompressiveParams,
) -> Result<OracleLabels> {
    assert!(params.max_sents >= 1, "max_sents must be at least 1");
    assert!(params.beam != Some(0), "beam width must be at least 1");
    spans.validate(doc).map_err(Error::InvalidSpans)?;

    let mut state = OverlapState::new(&doc.reference_tokens());
    let mut variants = Vec::with_capacity(doc.num_sentences());
    for (i, sentence) in doc.sentences.iter().enumerate() {
        let sp = spans.sentence(i);
        if sp.len() > params.max_spans || sp.len() > 31 {
            return Err(Error::TooManySpans {
                sentence: i,
                count: sp.len(),
                cap: params.max_spans.min(31),
            });
        }
        let mut vs = Vec::new();
        for mask in 0..(1u32 << sp.len()) {
            let kept = kept_tokens(sentence.len(), sp, mask);
            if kept.is_empty() {
                continue;
            }
            let toks: Vec<&str> = kept.iter().map(|&j| sentence.tokens()[j].as_str()).collect();
            let segment = state.encode(&toks);
            vs.push(Variant { mask, kept, segment });
        }
        variants.push(vs);
    }

    let mut search = Search {
        variants,
        arena: Vec::new(),
        state,
        _doc: doc,
    };
    let mut beam = vec![Hyp {
        node: ROOT,
        count: 0,
        score: 0.0,
    }];
    let mut best: Option<Hyp> = None;

    for i in 0..doc.num_sentences() {
        let mut next = Vec::with_capacity(beam.len() * (1 + search.variants[i].len()));
        for h in beam {
            next.push(h);
            if h.count as usize >= params.max_sents {
                continue;
            }
            search.apply(h.node);
            for v in 0..search.variants[i].len() {
                search.state.add_segment(&search.variants[i][v].segment);
                let score = search.state.score();
                search
                    .state
                    .remove_segment(&search.variants[i][v].segment)
                    .expect("segment was just added");
                let node = search.push(h.node, i, v);
                let child = Hyp {
                    node,
                    count: h.count + 1,
                    score,
                };
                if best.is_none_or(|b| search.rank(&child, &b) == Ordering::Less) {
                    best = Some(child);
                }
                next.push(child);
            }
            search.retract(h.node);
        }
        if let Some(n) = params.beam {
            if next.len() > n {
                let mut keyed: Vec<(Hyp, Vec<(u32, u32)>)> =
                    next.into_iter().map(|h| (h, search.path_key(h.node))).collect();
                keyed.sort_by(|(a, ka), (b, kb)| {
                    b.score
                        .total_cmp(&a.score)
                        .then(a.count.cmp(&b.count))
                        .then_with(|| ka.cmp(kb))
                });
                keyed.truncate(n);
                next = keyed.into_iter().map(|(h, _)| h).collect();
            }
        }
        beam = next;
    }

    if let Some((p, m)) = params.seed {
        let seeded = extractive_oracle(doc, p, m.min(params.max_sents)).selected();
        let mut node = ROOT;
        for &i in &seeded {
            // mask 0 never deletes anything, so it is always variant 0
            node = search.push(node, i, 0);
        }
        search.apply(node);
        let score = search.state.score();
        search.retract(node);
        let candidate = Hyp {
            node,
            count: seeded.len() as u32,
            score,
        };
        if best.is_none_or(|b| search.rank(&candidate, &b) == Ordering::Less) {
            best = Some(candidate);
        }
    }

    let best = best.expect("the first sentence always has a keep-everything variant");
    let mut labels = OracleLabels::from_selection(doc, &[], best.score, Objective::AvgR1R2);
    for (i, v) in search.path(best.node) {
        let (i, v) = (i as usize, v as usize);
        labels.z[i] = true;
        for &j in &search.variants[i][v].kept {
            labels.y[i][j] = true;
        }
    }
    Ok(labels)
}
