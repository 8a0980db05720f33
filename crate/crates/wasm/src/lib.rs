//! Browser bindings. Texts are one sentence per line, tokens separated by whitespace; every
//! function returns a JSON string.

use serde::Serialize;
use sumstate::corpus::Document;
use sumstate::oracle::{
    bow_oracle, compressive_oracle, extractive_oracle, heuristic_spans as spans_of, CompressiveParams,
    OracleKind,
};
use sumstate::rouge::{rouge_l_segmented, rouge_n_segmented, RougeScore};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Scores {
    pub r1: RougeScore,
    pub r2: RougeScore,
    pub rl: RougeScore,
}

#[derive(Debug, Serialize)]
pub struct TokenView {
    pub token: String,
    pub kept: bool,
}

#[derive(Debug, Serialize)]
pub struct SentenceView {
    pub index: usize,
    pub selected: bool,
    pub tokens: Vec<TokenView>,
}

#[derive(Debug, Serialize)]
pub struct OracleView {
    pub objective: String,
    pub score: f64,
    pub sentences: Vec<SentenceView>,
    pub summary: String,
    pub scores: Scores,
}

#[derive(Debug, Serialize)]
pub struct SpanView {
    pub index: usize,
    pub spans: Vec<[usize; 2]>,
    pub tokens: Vec<TokenView>,
}

fn sentences(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect()
}

fn document(text: &str, reference: &str) -> Result<Document, String> {
    let (s, r) = (sentences(text), sentences(reference));
    if s.is_empty() {
        return Err("the document has no sentences".into());
    }
    if r.is_empty() {
        return Err("the reference has no sentences".into());
    }
    let join = |v: &[Vec<String>]| v.iter().map(|t| t.join(" ")).collect::<Vec<_>>();
    let (s, r) = (join(&s), join(&r));
    let s: Vec<&str> = s.iter().map(String::as_str).collect();
    let r: Vec<&str> = r.iter().map(String::as_str).collect();
    Document::from_lines("input", &s, &r)
}

fn scores<T: AsRef<[String]>, U: AsRef<[String]>>(cand: &[T], reference: &[U]) -> Scores {
    Scores {
        r1: rouge_n_segmented(cand, reference, 1),
        r2: rouge_n_segmented(cand, reference, 2),
        rl: rouge_l_segmented(cand, reference),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("views serialize")
}

pub fn rouge_json(candidate: &str, reference: &str) -> String {
    to_json(&scores(&sentences(candidate), &sentences(reference)))
}

pub fn oracle_json(
    text: &str,
    reference: &str,
    objective: &str,
    beam: usize,
    max_sents: usize,
) -> Result<String, String> {
    let doc = document(text, reference)?;
    let kind: OracleKind = objective.parse()?;
    if max_sents == 0 {
        return Err("max sentences must be at least 1".into());
    }
    let spans = spans_of(&doc);
    let labels = match kind {
        OracleKind::Extractive => extractive_oracle(&doc, doc.num_sentences(), max_sents),
        OracleKind::Bow => bow_oracle(&doc),
        OracleKind::Compressive => {
            let params = CompressiveParams {
                beam: (beam > 0).then_some(beam),
                max_sents,
                ..CompressiveParams::default()
            };
            compressive_oracle(&doc, &spans, &params).map_err(|e| e.to_string())?
        }
    };
    let summary = labels.summary();
    let realized: Vec<Vec<String>> = summary
        .tokens(&doc)
        .into_iter()
        .map(|t| t.into_iter().map(str::to_owned).collect())
        .collect();
    let view = OracleView {
        objective: kind.to_string(),
        score: labels.score,
        sentences: doc
            .sentences
            .iter()
            .enumerate()
            .map(|(i, s)| SentenceView {
                index: i,
                selected: labels.z[i],
                tokens: s
                    .tokens()
                    .iter()
                    .zip(&labels.y[i])
                    .map(|(t, &k)| TokenView {
                        token: t.clone(),
                        kept: k,
                    })
                    .collect(),
            })
            .collect(),
        summary: realized
            .iter()
            .map(|t| t.join(" "))
            .collect::<Vec<_>>()
            .join("\n"),
        scores: scores(&realized, &doc.reference_tokens()),
    };
    Ok(to_json(&view))
}

pub fn spans_json(text: &str) -> String {
    let s = sentences(text);
    if s.is_empty() {
        return "[]".into();
    }
    let doc = document(text, "x").expect("non-empty sentences form a document");
    let spans = spans_of(&doc);
    let views: Vec<SpanView> = doc
        .sentences
        .iter()
        .enumerate()
        .map(|(i, sentence)| {
            let sp = spans.sentence(i);
            SpanView {
                index: i,
                spans: sp.iter().map(|s| [s.start, s.end]).collect(),
                tokens: sentence
                    .tokens()
                    .iter()
                    .enumerate()
                    .map(|(j, t)| TokenView {
                        token: t.clone(),
                        kept: !sp.iter().any(|s| s.contains(j)),
                    })
                    .collect(),
            }
        })
        .collect();
    to_json(&views)
}

/// R1, R2 and RL of `candidate` against `reference`.
#[wasm_bindgen]
pub fn rouge(candidate: &str, reference: &str) -> String {
    rouge_json(candidate, reference)
}

/// Oracle labels for a document under `objective` (`extractive`, `compressive` or `bow`).
/// A `beam` of 0 searches exhaustively.
#[wasm_bindgen]
pub fn oracle(
    text: &str,
    reference: &str,
    objective: &str,
    beam: usize,
    max_sents: usize,
) -> Result<String, JsError> {
    oracle_json(text, reference, objective, beam, max_sents).map_err(|e| JsError::new(&e))
}

/// Deletable spans the heuristic finds in each sentence.
#[wasm_bindgen]
pub fn heuristic_spans(text: &str) -> String {
    spans_json(text)
}
