use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sumstate::config::{default_of, KEYS};

fn help(key: &str) -> String {
    let desc = KEYS.iter().find(|(k, _, _)| *k == key).map_or("", |(_, _, d)| d);
    match default_of(key) {
        "" => format!("{desc} [default: none]"),
        d => format!("{desc} [default: {d}]"),
    }
}

fn value_name(key: &str) -> String {
    match key {
        "corpus" | "labels" | "out" | "checkpoint" | "summaries" | "validation" | "validation_labels"
        | "log" => "FILE".into(),
        _ => "VALUE".into(),
    }
}

/// Declares a subcommand's options. Every option is a configuration key; a flag given on the
/// command line overrides the same key in `--config`.
macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($key:ident),* $(,)? } $(switches { $($switch:ident),* })?) => {
        $(#[$meta])*
        #[derive(Debug, Args)]
        pub struct $name {
            /// Configuration file of `key = value` lines; flags override its values [default: none]
            #[arg(long, value_name = "FILE")]
            pub config: Option<PathBuf>,
            $(
                #[arg(long, value_name = value_name(stringify!($key)), help = help(stringify!($key)))]
                pub $key: Option<String>,
            )*
            $($(
                #[arg(long, help = help(stringify!($switch)))]
                pub $switch: bool,
            )*)?
        }

        impl $name {
            pub fn overrides(&self) -> Vec<(&'static str, Option<String>)> {
                #[allow(unused_mut)]
                let mut out = vec![$((stringify!($key), self.$key.clone())),*];
                $($(
                    if self.$switch {
                        out.push((stringify!($switch), Some("true".to_owned())));
                    }
                )*)?
                out
            }
        }
    };
}

options! {
    /// Options of `oracle`.
    OracleArgs {
        corpus, out, objective, pool, max_len, beam, max_sents, span_cap, workers,
    }
    switches { strict }
}

options! {
    /// Options of `train`.
    TrainArgs {
        corpus, labels, out, log, validation, validation_labels, seed, embed_dim, hidden_dim,
        lambda_s0, lambda_s1, lambda_w0, lambda_w1, learning_rate, batch_size, epochs, mode,
        state_variant,
    }
    switches { strict }
}

options! {
    /// Options of `summarize`.
    SummarizeArgs {
        corpus, method, checkpoint, labels, lead, out,
    }
    switches { strict }
}

options! {
    /// Options of `evaluate`.
    EvaluateArgs {
        corpus, summaries, out, name, bin_width, workers,
    }
    switches { strict }
}

#[derive(Debug, Parser)]
#[command(
    name = "sumstate",
    version,
    about = "Oracle labeling, training and evaluation for extractive and compressive summarization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute oracle labels for a corpus and print the corpus-mean oracle score
    Oracle(OracleArgs),
    /// Train a model on a corpus with aligned labels and write a checkpoint
    Train(Box<TrainArgs>),
    /// Write one summary per document from a model, the LEAD baseline or oracle labels
    Summarize(SummarizeArgs),
    /// Score summaries against the references and write a report
    Evaluate {
        #[command(flatten)]
        args: EvaluateArgs,
        /// Add another system's report to the comparison table, as NAME=FILE [default: none]
        #[arg(long, value_name = "NAME=FILE")]
        compare: Vec<String>,
        /// Also write the comparison table as CSV [default: none]
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Print R1, R2 and RL F1 of a candidate text against a reference text (one sentence per line)
    Rouge {
        /// Candidate text file
        candidate: PathBuf,
        /// Reference text file
        reference: PathBuf,
    },
}
