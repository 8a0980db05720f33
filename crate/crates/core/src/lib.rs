//! Summary-state summarization toolkit.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: pre-tokenized documents, the newline-delimited corpus format and the LEAD baseline.
//! - [`rouge`]: ROUGE-1/2/L, the incremental overlap scorer used by the oracles, Pearson correlation.
//! - [`oracle`]: extractive, compressive and bag-of-words oracle labels plus rule-based compression spans.
//! - [`model`]: the hierarchical biLSTM encoder with summary-state decoders, exact losses and Adam training.
//! - [`eval`]: corpus-level ROUGE, length statistics and comparison tables.
//! - [`config`]: the flat key-value run configuration shared by the command-line tool.

pub mod config;
pub mod corpus;
mod error;
pub mod eval;
pub mod model;
pub mod oracle;
pub mod rouge;

pub use error::{Error, Result};
