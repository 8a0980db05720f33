use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Mode, ModelConfig};
use crate::corpus::Document;

/// Every trainable tensor. LSTM weights are `4h x (in + h)` with gate rows ordered
/// input, forget, cell, output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Embedding,
    WordFwdW,
    WordFwdB,
    WordBwdW,
    WordBwdB,
    SentFwdW,
    SentFwdB,
    SentBwdW,
    SentBwdB,
    SentStatesW,
    SentStatesB,
    WordStatesW,
    WordStatesB,
    /// Sentence summarizer-state projection and its bias.
    SentProjW,
    SentProjB,
    /// Sentence action scores and biases.
    SentActW,
    SentActB,
    /// Word summarizer-state projection and its bias.
    WordProjW,
    WordProjB,
    /// Word action scores and biases.
    WordActW,
    WordActB,
}

impl Slot {
    pub const ALL: [Slot; 21] = [
        Slot::Embedding,
        Slot::WordFwdW,
        Slot::WordFwdB,
        Slot::WordBwdW,
        Slot::WordBwdB,
        Slot::SentFwdW,
        Slot::SentFwdB,
        Slot::SentBwdW,
        Slot::SentBwdB,
        Slot::SentStatesW,
        Slot::SentStatesB,
        Slot::WordStatesW,
        Slot::WordStatesB,
        Slot::SentProjW,
        Slot::SentProjB,
        Slot::SentActW,
        Slot::SentActB,
        Slot::WordProjW,
        Slot::WordProjB,
        Slot::WordActW,
        Slot::WordActB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Embedding => "embedding",
            Slot::WordFwdW => "word_encoder.fwd.w",
            Slot::WordFwdB => "word_encoder.fwd.b",
            Slot::WordBwdW => "word_encoder.bwd.w",
            Slot::WordBwdB => "word_encoder.bwd.b",
            Slot::SentFwdW => "sent_encoder.fwd.w",
            Slot::SentFwdB => "sent_encoder.fwd.b",
            Slot::SentBwdW => "sent_encoder.bwd.w",
            Slot::SentBwdB => "sent_encoder.bwd.b",
            Slot::SentStatesW => "sent_states.w",
            Slot::SentStatesB => "sent_states.b",
            Slot::WordStatesW => "word_states.w",
            Slot::WordStatesB => "word_states.b",
            Slot::SentProjW => "sent_head.proj.w",
            Slot::SentProjB => "sent_head.proj.b",
            Slot::SentActW => "sent_head.action.w",
            Slot::SentActB => "sent_head.action.b",
            Slot::WordProjW => "word_head.proj.w",
            Slot::WordProjB => "word_head.proj.b",
            Slot::WordActW => "word_head.action.w",
            Slot::WordActB => "word_head.action.b",
        }
    }

    pub fn from_name(name: &str) -> Option<Slot> {
        Slot::ALL.into_iter().find(|s| s.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn is_bias(self) -> bool {
        self.name().ends_with(".b")
    }

    /// Forget-gate rows of an LSTM bias, if this is one.
    fn lstm_hidden(self, cfg: &ModelConfig) -> Option<usize> {
        let d = cfg.hidden_dim;
        match self {
            Slot::WordFwdB | Slot::WordBwdB | Slot::SentFwdB | Slot::SentBwdB => Some(d),
            Slot::SentStatesB | Slot::WordStatesB => Some(2 * d),
            _ => None,
        }
    }

    /// Parameters only the word-level decoder touches.
    pub fn is_word_decoder(self) -> bool {
        matches!(
            self,
            Slot::WordStatesW
                | Slot::WordStatesB
                | Slot::WordProjW
                | Slot::WordProjB
                | Slot::WordActW
                | Slot::WordActB
        )
    }

    pub fn shape(self, cfg: &ModelConfig, vocab_size: usize) -> (usize, usize) {
        let d = cfg.hidden_dim;
        let e = cfg.embed_dim;
        match self {
            Slot::Embedding => (vocab_size, e),
            Slot::WordFwdW | Slot::WordBwdW => (4 * d, e + d),
            Slot::SentFwdW | Slot::SentBwdW => (4 * d, 2 * d + d),
            Slot::WordFwdB | Slot::WordBwdB | Slot::SentFwdB | Slot::SentBwdB => (4 * d, 1),
            Slot::SentStatesW => (8 * d, 2 * d + 2 * d),
            Slot::SentStatesB => (8 * d, 1),
            Slot::WordStatesW => (8 * d, e + 2 * d),
            Slot::WordStatesB => (8 * d, 1),
            Slot::SentProjW => (d, cfg.sentence_feature_dim() + 2 * d),
            Slot::SentProjB | Slot::WordProjB => (d, 1),
            Slot::SentActW | Slot::WordActW => (2, d),
            Slot::SentActB | Slot::WordActB => (2, 1),
            Slot::WordProjW => (d, cfg.word_feature_dim() + 2 * d + 2 * d),
        }
    }
}

/// Row-major matrix (`cols == 1` for vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Lowercased word types; id 0 is the unknown word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

pub const UNK: &str = "<unk>";

impl Vocab {
    pub fn from_words(words: Vec<String>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocab { words, index }
    }

    /// Every document token type, sorted, after the unknown word.
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Self {
        let mut set = BTreeSet::new();
        for doc in docs {
            for s in &doc.sentences {
                for t in s.tokens() {
                    set.insert(t.to_lowercase());
                }
            }
        }
        set.remove(UNK);
        let words = std::iter::once(UNK.to_owned()).chain(set).collect();
        Vocab::from_words(words)
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(&token.to_lowercase()).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub vocab: Vocab,
    tensors: Vec<Tensor>,
}

impl ModelParams {
    /// All-zero parameters. Every pre-softmax score is then equal and every probability is 0.5.
    pub fn zeros(config: ModelConfig, vocab: Vocab) -> Self {
        let tensors = Slot::ALL
            .iter()
            .map(|s| {
                let (r, c) = s.shape(&config, vocab.len());
                Tensor::zeros(r, c)
            })
            .collect();
        ModelParams {
            config,
            vocab,
            tensors,
        }
    }

    /// Uniform(-0.1, 0.1) weights and embeddings, zero biases except forget gates at 1.
    pub fn init(config: ModelConfig, vocab: Vocab) -> Self {
        let mut p = ModelParams::zeros(config, vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(p.config.seed);
        for slot in Slot::ALL {
            let cfg = p.config.clone();
            let t = p.tensor_mut(slot);
            if slot.is_bias() {
                if let Some(h) = slot.lstm_hidden(&cfg) {
                    t.data[h..2 * h].fill(1.0);
                }
            } else {
                for v in &mut t.data {
                    *v = rng.gen_range(-0.1..0.1);
                }
            }
        }
        p
    }

    /// Every coordinate drawn from N(0, std²); used for gradient checks.
    pub fn random_normal(config: ModelConfig, vocab: Vocab, std: f64, seed: u64) -> Self {
        let mut p = ModelParams::zeros(config, vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, std).expect("positive std");
        for t in &mut p.tensors {
            for v in &mut t.data {
                *v = normal.sample(&mut rng);
            }
        }
        p
    }

    pub(crate) fn from_tensors(
        config: ModelConfig,
        vocab: Vocab,
        tensors: Vec<Tensor>,
    ) -> Result<Self, String> {
        if tensors.len() != Slot::ALL.len() {
            return Err(format!(
                "expected {} tensors, got {}",
                Slot::ALL.len(),
                tensors.len()
            ));
        }
        for (slot, t) in Slot::ALL.iter().zip(&tensors) {
            let want = slot.shape(&config, vocab.len());
            if (t.rows, t.cols) != want || t.data.len() != t.rows * t.cols {
                return Err(format!(
                    "tensor {} has shape {}x{} ({} values), expected {}x{}",
                    slot.name(),
                    t.rows,
                    t.cols,
                    t.data.len(),
                    want.0,
                    want.1
                ));
            }
        }
        Ok(ModelParams {
            config,
            vocab,
            tensors,
        })
    }

    pub fn tensor(&self, slot: Slot) -> &Tensor {
        &self.tensors[slot.index()]
    }

    pub fn tensor_mut(&mut self, slot: Slot) -> &mut Tensor {
        &mut self.tensors[slot.index()]
    }

    pub fn tensors(&self) -> impl Iterator<Item = (Slot, &Tensor)> {
        Slot::ALL.into_iter().zip(&self.tensors)
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn uses_word_decoder(&self) -> bool {
        self.config.mode == Mode::Compressive
    }
}

/// Gradients with the same layout as [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    slots: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(p: &ModelParams) -> Self {
        Gradients {
            slots: p.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect(),
        }
    }

    pub fn slot(&self, slot: Slot) -> &[f64] {
        &self.slots[slot.index()]
    }

    pub fn slot_mut(&mut self, slot: Slot) -> &mut [f64] {
        &mut self.slots[slot.index()]
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for v in self.slots.iter_mut().flatten() {
            *v *= k;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.slots.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}
