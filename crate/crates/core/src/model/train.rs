use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{decode, forward_backward};
use super::params::{Gradients, ModelParams, Slot, Vocab};
use super::{Mode, ModelConfig};
use crate::corpus::{Document, Summary, SummarySentence};
use crate::oracle::OracleLabels;
use crate::{Error, Result};

/// Adam with bias-corrected moments.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(params: &ModelParams) -> Self {
        let c = &params.config;
        Adam {
            lr: c.learning_rate,
            beta1: c.beta1,
            beta2: c.beta2,
            eps: c.adam_eps,
            step: 0,
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
        }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &Gradients) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        for slot in Slot::ALL {
            let g = grads.slot(slot);
            let m = self.m.slot_mut(slot);
            let v = self.v.slot_mut(slot);
            let p = &mut params.tensor_mut(slot).data;
            for k in 0..p.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let mhat = m[k] / bc1;
                let vhat = v[k] / bc2;
                p[k] -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

/// Mean losses of one optimizer step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchLog {
    pub epoch: usize,
    pub batch: usize,
    pub sentence_loss: f64,
    pub word_loss: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean per-document total loss over the epoch, measured before each batch's update.
    pub mean_loss: f64,
    pub validation_loss: Option<f64>,
    pub validation_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub batches: Vec<BatchLog>,
    pub epochs: Vec<EpochLog>,
}

fn check_aligned(docs: &[Document], labels: &[OracleLabels]) -> Result<()> {
    if docs.len() != labels.len() {
        return Err(Error::Misaligned(format!(
            "{} documents but {} label records",
            docs.len(),
            labels.len()
        )));
    }
    for (d, l) in docs.iter().zip(labels) {
        l.check_shape(d)?;
    }
    Ok(())
}

/// Builds the vocabulary from `docs`, initializes parameters from `config.seed` and trains.
pub fn train(
    docs: &[Document],
    labels: &[OracleLabels],
    config: &ModelConfig,
) -> Result<(ModelParams, TrainReport)> {
    config.validate().map_err(Error::Config)?;
    let params = ModelParams::init(config.clone(), Vocab::build(docs));
    train_from(params, docs, labels, None)
}

/// Teacher-forced mini-batch Adam training from the given parameters. Batch gradients are the
/// mean of per-document gradients; the document order is reshuffled every epoch from the seed.
pub fn train_from(
    mut params: ModelParams,
    docs: &[Document],
    labels: &[OracleLabels],
    validation: Option<(&[Document], &[OracleLabels])>,
) -> Result<(ModelParams, TrainReport)> {
    check_aligned(docs, labels)?;
    if let Some((vd, vl)) = validation {
        check_aligned(vd, vl)?;
    }
    let config = params.config.clone();
    let mut adam = Adam::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut report = TrainReport::default();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_total = 0.0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            let mut grads = Gradients::zeros_like(&params);
            let (mut s, mut w) = (0.0, 0.0);
            for &k in chunk {
                let out = forward_backward(&docs[k], &labels[k], &params)?;
                grads.add_assign(&out.grads);
                s += out.sentence;
                w += out.word;
            }
            let n = chunk.len() as f64;
            grads.scale(1.0 / n);
            adam.step(&mut params, &grads);
            epoch_total += s + w;
            report.batches.push(BatchLog {
                epoch,
                batch: batch + 1,
                sentence_loss: s / n,
                word_loss: w / n,
                total: (s + w) / n,
            });
        }
        let (validation_loss, validation_accuracy) = match validation {
            Some((vd, vl)) if !vd.is_empty() => {
                let mut total = 0.0;
                for (d, l) in vd.iter().zip(vl) {
                    total += forward_backward(d, l, &params)?.total;
                }
                (
                    Some(total / vd.len() as f64),
                    Some(teacher_forced_accuracy(vd, vl, &params)?),
                )
            }
            _ => (None, None),
        };
        let mean_loss = if docs.is_empty() {
            0.0
        } else {
            epoch_total / docs.len() as f64
        };
        log::info!("epoch {epoch}: mean loss {mean_loss:.6}");
        report.epochs.push(EpochLog {
            epoch,
            mean_loss,
            validation_loss,
            validation_accuracy,
        });
    }
    Ok((params, report))
}

/// Fraction of sentences whose teacher-forced prediction `p(z=1) > 0.5` matches the label.
pub fn teacher_forced_accuracy(
    docs: &[Document],
    labels: &[OracleLabels],
    params: &ModelParams,
) -> Result<f64> {
    check_aligned(docs, labels)?;
    let (mut right, mut total) = (0usize, 0usize);
    for (d, l) in docs.iter().zip(labels) {
        let trace = decode(d, params, Some(l))?;
        for (p, &z) in trace.sentence_probs.iter().zip(&l.z) {
            right += usize::from((*p > 0.5) == z);
            total += 1;
        }
    }
    Ok(if total == 0 {
        1.0
    } else {
        right as f64 / total as f64
    })
}

/// Free-running output for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub summary: Summary,
    pub sentence_probs: Vec<f64>,
    pub word_probs: Vec<Option<Vec<f64>>>,
    /// No sentence passed the threshold and the most probable one was used.
    pub fallback: bool,
}

/// Free-running decode. The summary holds exactly the sentences whose probability exceeds 0.5
/// (and, in compressive mode, the words whose probability exceeds 0.5); selected sentences that
/// keep no word are dropped. If nothing is selected, the most probable sentence is returned
/// whole (lowest index on ties).
pub fn summarize(doc: &Document, params: &ModelParams) -> Result<ModelSummary> {
    let trace = decode(doc, params, None)?;
    let mut sentences: Vec<SummarySentence> = trace
        .z
        .iter()
        .enumerate()
        .filter(|(_, &z)| z)
        .filter_map(|(index, _)| {
            let kept: Vec<usize> = match params.config.mode {
                Mode::Extractive => (0..doc.sentences[index].len()).collect(),
                Mode::Compressive => trace.y[index]
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(j, _)| j)
                    .collect(),
            };
            (!kept.is_empty()).then_some(SummarySentence { index, kept })
        })
        .collect();
    let fallback = sentences.is_empty();
    if fallback {
        let best =
            trace
                .sentence_probs
                .iter()
                .enumerate()
                .fold(0, |b, (i, p)| if *p > trace.sentence_probs[b] { i } else { b });
        sentences.push(SummarySentence {
            index: best,
            kept: (0..doc.sentences[best].len()).collect(),
        });
    }
    let summary = Summary { sentences };
    summary.validate(doc)?;
    Ok(ModelSummary {
        summary,
        sentence_probs: trace.sentence_probs,
        word_probs: trace.word_probs,
        fallback,
    })
}
