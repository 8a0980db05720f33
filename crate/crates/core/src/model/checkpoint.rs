//! Checkpoints are a single JSON object holding the model configuration, the vocabulary and
//! every tensor with its shape. Floats are written in shortest round-trip form, so a reload is
//! bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{ModelParams, Slot, Tensor, Vocab};
use super::ModelConfig;
use crate::{Error, Result};

const FORMAT: &str = "sumstate-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorRecord {
    name: String,
    shape: [usize; 2],
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: ModelConfig,
    vocab: Vec<String>,
    tensors: Vec<TensorRecord>,
}

pub fn write_checkpoint<W: Write>(params: &ModelParams, w: W) -> Result<()> {
    let file = CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        config: params.config.clone(),
        vocab: params.vocab.words().to_vec(),
        tensors: params
            .tensors()
            .map(|(slot, t)| TensorRecord {
                name: slot.name().into(),
                shape: [t.rows, t.cols],
                data: t.data.clone(),
            })
            .collect(),
    };
    serde_json::to_writer(w, &file)?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(r: R) -> Result<ModelParams> {
    let file: CheckpointFile = serde_json::from_reader(r)?;
    if file.format != FORMAT {
        return Err(Error::Checkpoint(format!(
            "not a checkpoint (format `{}`)",
            file.format
        )));
    }
    if file.version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {}", file.version)));
    }
    file.config.validate().map_err(Error::Config)?;
    let mut tensors = Vec::with_capacity(Slot::ALL.len());
    for (slot, rec) in Slot::ALL.iter().zip(&file.tensors) {
        if Slot::from_name(&rec.name) != Some(*slot) {
            return Err(Error::Checkpoint(format!(
                "expected tensor `{}`, found `{}`",
                slot.name(),
                rec.name
            )));
        }
    }
    for rec in file.tensors {
        tensors.push(Tensor {
            rows: rec.shape[0],
            cols: rec.shape[1],
            data: rec.data,
        });
    }
    ModelParams::from_tensors(file.config, Vocab::from_words(file.vocab), tensors).map_err(Error::Checkpoint)
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_checkpoint(params, &mut buf)?;
    buf.push(b'\n');
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(std::io::BufReader::new(file))
}
