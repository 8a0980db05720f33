use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{forward_backward, loss_value};
use super::params::{ModelParams, Slot, Vocab};
use super::ModelConfig;
use crate::corpus::Document;
use crate::oracle::OracleLabels;
use crate::Result;

pub const SAMPLES_PER_TENSOR: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCheck {
    pub name: String,
    pub sampled: usize,
    pub max_rel_error: f64,
    pub max_abs_analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub tensors: Vec<TensorCheck>,
}

/// Compares analytic gradients with central differences on N(0, 0.1²) parameters.
///
/// For every tensor, up to [`SAMPLES_PER_TENSOR`] coordinates (all of them for smaller tensors)
/// are checked; the error is `|analytic - numeric| / max(1, |analytic|, |numeric|)`.
pub fn grad_check(
    doc: &Document,
    gold: &OracleLabels,
    config: &ModelConfig,
    epsilon: f64,
) -> Result<GradCheckReport> {
    let mut params = ModelParams::random_normal(config.clone(), Vocab::build([doc]), 0.1, config.seed);
    grad_check_at(&mut params, doc, gold, epsilon)
}

pub(crate) fn grad_check_at(
    params: &mut ModelParams,
    doc: &Document,
    gold: &OracleLabels,
    epsilon: f64,
) -> Result<GradCheckReport> {
    let analytic = forward_backward(doc, gold, params)?.grads;
    let mut rng = ChaCha8Rng::seed_from_u64(params.config.seed ^ 0x6ead);
    let mut tensors = Vec::new();
    for slot in Slot::ALL {
        let len = params.tensor(slot).data.len();
        let coords: Vec<usize> = if len <= SAMPLES_PER_TENSOR {
            (0..len).collect()
        } else {
            (0..SAMPLES_PER_TENSOR).map(|_| rng.gen_range(0..len)).collect()
        };
        let mut worst: f64 = 0.0;
        for &k in &coords {
            let orig = params.tensor(slot).data[k];
            params.tensor_mut(slot).data[k] = orig + epsilon;
            let plus = loss_value(doc, gold, params)?;
            params.tensor_mut(slot).data[k] = orig - epsilon;
            let minus = loss_value(doc, gold, params)?;
            params.tensor_mut(slot).data[k] = orig;
            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic.slot(slot)[k];
            let err = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
            worst = worst.max(err);
        }
        tensors.push(TensorCheck {
            name: slot.name().to_owned(),
            sampled: coords.len(),
            max_rel_error: worst,
            max_abs_analytic: analytic.slot(slot).iter().fold(0.0, |m, v| m.max(v.abs())),
        });
    }
    Ok(GradCheckReport {
        max_rel_error: tensors.iter().fold(0.0, |m, t| m.max(t.max_rel_error)),
        tensors,
    })
}
