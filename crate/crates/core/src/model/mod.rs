//! Hierarchical biLSTM encoder with summary-state decoders.
//!
//! A document is encoded by a word-level biLSTM per sentence and a sentence-level biLSTM over
//! the resulting sentence vectors. The extractive decoder visits sentences in order and keeps an
//! LSTM state of the summary built so far; in compressive mode each selected sentence is further
//! decoded word by word with its own summary-state LSTM, whose final state is what the
//! sentence-level state consumes.
//!
//! Gradients come from a small reverse-mode tape ([`tape`]) and are checked against central
//! finite differences in [`grad_check`].

mod checkpoint;
mod gradcheck;
mod network;
mod params;
mod tape;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use gradcheck::{grad_check, GradCheckReport};
pub use network::{decode, encode, loss, DecodeTrace, EncoderOutput, LossOutput};
pub use params::{Gradients, ModelParams, Slot, Tensor, Vocab, UNK};
pub use train::{
    summarize, teacher_forced_accuracy, train, train_from, Adam, BatchLog, EpochLog, ModelSummary,
    TrainReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Extractive,
    Compressive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateVariant {
    /// Summary state is an LSTM over the selected units.
    Lstm,
    /// Summary state is the probability-weighted sum of earlier sentence vectors.
    Averaging,
}

macro_rules! text_enum {
    ($ty:ty { $($name:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!("unknown value `{other}` (expected one of: {})", [$($name),+].join(", "))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

text_enum!(Mode { "extractive" => Mode::Extractive, "compressive" => Mode::Compressive });
text_enum!(StateVariant { "lstm" => StateVariant::Lstm, "averaging" => StateVariant::Averaging });

/// Model shape, loss weights and training schedule.
///
/// Loss weights, learning rate, batch size and epoch count default to the published training
/// setup; the hidden size defaults to 32 rather than 512 so that training runs on a laptop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub lambda_s0: f64,
    pub lambda_s1: f64,
    pub lambda_w0: f64,
    pub lambda_w1: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub mode: Mode,
    pub state_variant: StateVariant,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 32,
            hidden_dim: 32,
            lambda_s0: 2.0,
            lambda_s1: 1.0,
            lambda_w0: 1.0,
            lambda_w1: 0.5,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 2,
            epochs: 5,
            mode: Mode::Extractive,
            state_variant: StateVariant::Lstm,
            seed: 13,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.batch_size == 0 {
            return Err("embed_dim, hidden_dim and batch_size must be at least 1".into());
        }
        let lambdas = [self.lambda_s0, self.lambda_s1, self.lambda_w0, self.lambda_w1];
        if lambdas.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err("loss weights must be positive".into());
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err("learning_rate must be finite and non-negative".into());
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || self.adam_eps.is_nan()
            || self.adam_eps <= 0.0
        {
            return Err("Adam constants out of range".into());
        }
        Ok(())
    }

    /// Length of the per-sentence encoder feature `[e(D); e(s); h^s]`.
    pub fn sentence_feature_dim(&self) -> usize {
        6 * self.hidden_dim
    }

    /// Length of the per-word encoder feature `[e(D); e(s); e(w); h^s; h^w]`.
    pub fn word_feature_dim(&self) -> usize {
        8 * self.hidden_dim + self.embed_dim
    }
}
