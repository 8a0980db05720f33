use super::params::{Gradients, ModelParams, Slot};
use super::tape::{softmax2, NodeId, Tape};
use super::{Mode, ModelConfig, StateVariant};
use crate::corpus::Document;
use crate::oracle::OracleLabels;
use crate::{Error, Result};

/// Tape handles of the encoder outputs for one document.
pub(crate) struct EncoderNodes {
    doc_vec: NodeId,
    /// `e(s_i)`
    sent_vecs: Vec<NodeId>,
    /// `h^s_i`
    sent_hidden: Vec<NodeId>,
    /// `e(w_ij)`
    word_embs: Vec<Vec<NodeId>>,
    /// `h^w_ij`
    word_hidden: Vec<Vec<NodeId>>,
    /// `d^s_i`
    sent_features: Vec<NodeId>,
}

/// Encoder outputs as plain vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    pub word_hidden: Vec<Vec<Vec<f64>>>,
    pub sentence_vecs: Vec<Vec<f64>>,
    pub sentence_hidden: Vec<Vec<f64>>,
    pub document_vec: Vec<f64>,
    pub sentence_features: Vec<Vec<f64>>,
    pub word_features: Vec<Vec<Vec<f64>>>,
}

type LstmState = (NodeId, NodeId);

pub(crate) struct Graph<'p> {
    pub tape: Tape,
    pub params: &'p ModelParams,
}

impl<'p> Graph<'p> {
    pub fn new(params: &'p ModelParams) -> Self {
        Graph {
            tape: Tape::default(),
            params,
        }
    }

    fn d(&self) -> usize {
        self.params.config.hidden_dim
    }

    fn zero_state(&mut self, hidden: usize) -> LstmState {
        (self.tape.zeros(hidden), self.tape.zeros(hidden))
    }

    fn lstm_step(&mut self, w: Slot, b: Slot, x: NodeId, (h, c): LstmState) -> LstmState {
        let hidden = self.tape.value(h).len();
        let xh = self.tape.concat(&[x, h]);
        let gates = self.tape.affine(self.params, w, b, xh);
        let pre: Vec<NodeId> = (0..4)
            .map(|k| self.tape.slice(gates, k * hidden, hidden))
            .collect();
        let i = self.tape.sigmoid(pre[0]);
        let f = self.tape.sigmoid(pre[1]);
        let g = self.tape.tanh(pre[2]);
        let o = self.tape.sigmoid(pre[3]);
        let fc = self.tape.mul(f, c);
        let ig = self.tape.mul(i, g);
        let c2 = self.tape.add(fc, ig);
        let tc = self.tape.tanh(c2);
        let h2 = self.tape.mul(o, tc);
        (h2, c2)
    }

    /// Hidden outputs of one LSTM direction, aligned with `inputs`.
    fn run(&mut self, w: Slot, b: Slot, inputs: &[NodeId], reverse: bool) -> Vec<NodeId> {
        let mut state = self.zero_state(self.d());
        let mut out = vec![0; inputs.len()];
        let order: Vec<usize> = if reverse {
            (0..inputs.len()).rev().collect()
        } else {
            (0..inputs.len()).collect()
        };
        for k in order {
            state = self.lstm_step(w, b, inputs[k], state);
            out[k] = state.0;
        }
        out
    }

    pub fn encode(&mut self, doc: &Document) -> EncoderNodes {
        let p = self.params;
        let mut word_embs = Vec::new();
        let mut word_hidden = Vec::new();
        let mut sent_vecs = Vec::new();
        for s in &doc.sentences {
            let embs: Vec<NodeId> = s
                .tokens()
                .iter()
                .map(|t| self.tape.row(p, Slot::Embedding, p.vocab.id(t)))
                .collect();
            let fwd = self.run(Slot::WordFwdW, Slot::WordFwdB, &embs, false);
            let bwd = self.run(Slot::WordBwdW, Slot::WordBwdB, &embs, true);
            let hidden: Vec<NodeId> = fwd
                .iter()
                .zip(&bwd)
                .map(|(&f, &b)| self.tape.concat(&[f, b]))
                .collect();
            sent_vecs.push(
                self.tape
                    .concat(&[*fwd.last().expect("non-empty sentence"), bwd[0]]),
            );
            word_embs.push(embs);
            word_hidden.push(hidden);
        }
        let fwd = self.run(Slot::SentFwdW, Slot::SentFwdB, &sent_vecs, false);
        let bwd = self.run(Slot::SentBwdW, Slot::SentBwdB, &sent_vecs, true);
        let sent_hidden: Vec<NodeId> = fwd
            .iter()
            .zip(&bwd)
            .map(|(&f, &b)| self.tape.concat(&[f, b]))
            .collect();
        let doc_vec = self
            .tape
            .concat(&[*fwd.last().expect("non-empty document"), bwd[0]]);
        let sent_features = sent_vecs
            .iter()
            .zip(&sent_hidden)
            .map(|(&es, &hs)| self.tape.concat(&[doc_vec, es, hs]))
            .collect();
        EncoderNodes {
            doc_vec,
            sent_vecs,
            sent_hidden,
            word_embs,
            word_hidden,
            sent_features,
        }
    }

    fn word_feature(&mut self, enc: &EncoderNodes, i: usize, j: usize) -> NodeId {
        self.tape.concat(&[
            enc.doc_vec,
            enc.sent_vecs[i],
            enc.word_embs[i][j],
            enc.sent_hidden[i],
            enc.word_hidden[i][j],
        ])
    }
}

/// Everything the decoder computed for one document.
#[derive(Debug, Clone)]
pub struct DecodeTrace {
    pub doc_id: String,
    /// `p(z_i = 1)` for every sentence.
    pub sentence_probs: Vec<f64>,
    /// `p(y_ij = 1)` for every word of a decoded (selected) sentence in compressive mode.
    pub word_probs: Vec<Option<Vec<f64>>>,
    /// Summary state `o^s_i` seen when deciding sentence `i`.
    pub sentence_states: Vec<Vec<f64>>,
    /// Word summary state `o^w_ij` seen when deciding word `j` of a decoded sentence.
    pub word_states: Vec<Option<Vec<Vec<f64>>>>,
    /// Compressed sentence representation `e(c_i)` of decoded sentences.
    pub compressed: Vec<Option<Vec<f64>>>,
    /// Sentence decisions taken (teacher bits when teacher-forced).
    pub z: Vec<bool>,
    /// Word decisions taken; all false for sentences that were not decoded.
    pub y: Vec<Vec<bool>>,
    pub teacher_forced: bool,
    pub mode: Mode,
    tape: Tape,
    sent_logits: Vec<NodeId>,
    word_logits: Vec<Option<Vec<NodeId>>>,
}

impl DecodeTrace {
    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }
}

fn encoder_output(g: &mut Graph<'_>, enc: &EncoderNodes) -> EncoderOutput {
    let vals =
        |g: &Graph<'_>, ids: &[NodeId]| ids.iter().map(|&n| g.tape.value(n).to_vec()).collect::<Vec<_>>();
    let mut word_features = Vec::new();
    for i in 0..enc.word_embs.len() {
        let ids: Vec<NodeId> = (0..enc.word_embs[i].len())
            .map(|j| g.word_feature(enc, i, j))
            .collect();
        word_features.push(vals(g, &ids));
    }
    EncoderOutput {
        word_hidden: enc.word_hidden.iter().map(|h| vals(g, h)).collect(),
        sentence_vecs: vals(g, &enc.sent_vecs),
        sentence_hidden: vals(g, &enc.sent_hidden),
        document_vec: g.tape.value(enc.doc_vec).to_vec(),
        sentence_features: vals(g, &enc.sent_features),
        word_features,
    }
}

/// Runs the two-level biLSTM encoder.
pub fn encode(doc: &Document, params: &ModelParams) -> EncoderOutput {
    let mut g = Graph::new(params);
    let enc = g.encode(doc);
    encoder_output(&mut g, &enc)
}

/// Encodes and decodes one document. With `teacher`, every sentence and word decision follows
/// the labels; otherwise a unit is kept when its probability exceeds 0.5.
pub fn decode(doc: &Document, params: &ModelParams, teacher: Option<&OracleLabels>) -> Result<DecodeTrace> {
    if let Some(t) = teacher {
        t.check_shape(doc)?;
    }
    let cfg = &params.config;
    let d = cfg.hidden_dim;
    let mut g = Graph::new(params);
    let enc = g.encode(doc);
    let m = doc.num_sentences();

    let mut trace = DecodeTrace {
        doc_id: doc.id.clone(),
        sentence_probs: Vec::with_capacity(m),
        word_probs: vec![None; m],
        sentence_states: Vec::with_capacity(m),
        word_states: vec![None; m],
        compressed: vec![None; m],
        z: Vec::with_capacity(m),
        y: doc.sentences.iter().map(|s| vec![false; s.len()]).collect(),
        teacher_forced: teacher.is_some(),
        mode: cfg.mode,
        tape: Tape::default(),
        sent_logits: Vec::with_capacity(m),
        word_logits: vec![None; m],
    };

    let mut sent_state = g.zero_state(2 * d);
    let mut avg_state = g.tape.zeros(2 * d);
    for i in 0..m {
        let summary_state = match cfg.state_variant {
            StateVariant::Lstm => sent_state.0,
            StateVariant::Averaging => avg_state,
        };
        let feat = g.tape.concat(&[enc.sent_features[i], summary_state]);
        let proj = g.tape.affine(params, Slot::SentProjW, Slot::SentProjB, feat);
        let p_i = g.tape.tanh(proj);
        let logits = g.tape.affine(params, Slot::SentActW, Slot::SentActB, p_i);
        let prob = softmax2(g.tape.value(logits))[1];
        let keep = teacher.map_or(prob > 0.5, |t| t.z[i]);
        trace.sentence_states.push(g.tape.value(summary_state).to_vec());
        trace.sentence_probs.push(prob);
        trace.sent_logits.push(logits);
        trace.z.push(keep);

        if cfg.state_variant == StateVariant::Averaging {
            let weighted = g.tape.scale_by_prob(enc.sent_vecs[i], logits);
            avg_state = g.tape.add(avg_state, weighted);
        }
        if !keep {
            continue;
        }
        let summary_input = match cfg.mode {
            Mode::Extractive => enc.sent_vecs[i],
            Mode::Compressive => {
                let n = doc.sentences[i].len();
                let mut word_state = g.zero_state(2 * d);
                let mut probs = Vec::with_capacity(n);
                let mut states = Vec::with_capacity(n);
                let mut logit_ids = Vec::with_capacity(n);
                for j in 0..n {
                    let dw = g.word_feature(&enc, i, j);
                    let feat = g.tape.concat(&[dw, summary_state, word_state.0]);
                    let proj = g.tape.affine(params, Slot::WordProjW, Slot::WordProjB, feat);
                    let q = g.tape.tanh(proj);
                    let wl = g.tape.affine(params, Slot::WordActW, Slot::WordActB, q);
                    let wp = softmax2(g.tape.value(wl))[1];
                    let kept = teacher.map_or(wp > 0.5, |t| t.y[i][j]);
                    states.push(g.tape.value(word_state.0).to_vec());
                    probs.push(wp);
                    logit_ids.push(wl);
                    trace.y[i][j] = kept;
                    if kept {
                        word_state = g.lstm_step(
                            Slot::WordStatesW,
                            Slot::WordStatesB,
                            enc.word_embs[i][j],
                            word_state,
                        );
                    }
                }
                trace.word_probs[i] = Some(probs);
                trace.word_states[i] = Some(states);
                trace.word_logits[i] = Some(logit_ids);
                trace.compressed[i] = Some(g.tape.value(word_state.0).to_vec());
                word_state.0
            }
        };
        if cfg.mode == Mode::Extractive {
            trace.y[i].fill(true);
        }
        if cfg.state_variant == StateVariant::Lstm {
            sent_state = g.lstm_step(Slot::SentStatesW, Slot::SentStatesB, summary_input, sent_state);
        }
    }
    trace.tape = g.tape;
    Ok(trace)
}

/// Loss values and the gradient of the total with respect to every parameter.
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub sentence: f64,
    pub word: f64,
    pub total: f64,
    pub grads: Gradients,
}

/// Class-weighted terms: class `c` contributes `λ_c / count_c` per member; absent classes vanish.
fn class_weighted(
    labels: impl Iterator<Item = (NodeId, bool)> + Clone,
    lambda0: f64,
    lambda1: f64,
) -> Vec<(NodeId, usize, f64)> {
    let positives = labels.clone().filter(|&(_, b)| b).count();
    let negatives = labels.clone().count() - positives;
    labels
        .map(|(n, b)| {
            let (count, lambda) = if b {
                (positives, lambda1)
            } else {
                (negatives, lambda0)
            };
            (n, usize::from(b), lambda / count as f64)
        })
        .collect()
}

/// Weighted negative log-likelihood of the gold labels and its exact gradient.
///
/// `trace` must come from [`decode`] with `teacher = Some(gold)` and the same `params`.
pub fn loss(
    trace: &DecodeTrace,
    gold: &OracleLabels,
    config: &ModelConfig,
    params: &ModelParams,
) -> Result<LossOutput> {
    loss_impl(trace, gold, config, params, true)
}

fn loss_impl(
    trace: &DecodeTrace,
    gold: &OracleLabels,
    config: &ModelConfig,
    params: &ModelParams,
    with_grads: bool,
) -> Result<LossOutput> {
    if !trace.teacher_forced || trace.z != gold.z {
        return Err(Error::LabelMismatch {
            id: trace.doc_id.clone(),
            message: "loss needs a trace decoded with these labels as teacher".into(),
        });
    }
    // The tape is append-only; loss nodes go on a private copy so the trace stays reusable.
    let mut tape = trace.tape.clone();

    let sent_terms = class_weighted(
        trace.sent_logits.iter().copied().zip(gold.z.iter().copied()),
        config.lambda_s0,
        config.lambda_s1,
    );
    let sent_nll: Vec<(NodeId, f64)> = sent_terms
        .into_iter()
        .map(|(l, c, w)| (tape.nll(l, c), w))
        .collect();
    let sentence = tape.weighted_sum(sent_nll);

    let mut word_nll = Vec::new();
    if trace.mode == Mode::Compressive {
        for (i, logits) in trace.word_logits.iter().enumerate() {
            let Some(logits) = logits else { continue };
            let terms = class_weighted(
                logits.iter().copied().zip(gold.y[i].iter().copied()),
                config.lambda_w0,
                config.lambda_w1,
            );
            word_nll.extend(terms.into_iter().map(|(l, c, w)| (tape.nll(l, c), w)));
        }
    }
    let word = tape.weighted_sum(word_nll);

    let (s, w) = (tape.value(sentence)[0], tape.value(word)[0]);
    let total = s + w;
    if !total.is_finite() {
        return Err(Error::NonFiniteLoss(trace.doc_id.clone()));
    }
    let mut grads = Gradients::zeros_like(params);
    if with_grads {
        tape.backward(&[sentence, word], params, &mut grads);
    }
    Ok(LossOutput {
        sentence: s,
        word: w,
        total,
        grads,
    })
}

/// Teacher-forced forward pass plus loss.
pub(crate) fn forward_backward(
    doc: &Document,
    gold: &OracleLabels,
    params: &ModelParams,
) -> Result<LossOutput> {
    let trace = decode(doc, params, Some(gold))?;
    loss(&trace, gold, &params.config, params)
}

/// Loss value only, for finite differences.
pub(crate) fn loss_value(doc: &Document, gold: &OracleLabels, params: &ModelParams) -> Result<f64> {
    let trace = decode(doc, params, Some(gold))?;
    Ok(loss_impl(&trace, gold, &params.config, params, false)?.total)
}
