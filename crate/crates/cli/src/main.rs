//! `subnoise`: build vocabularies, fit Zipf's law, build noise tables, train
//! embeddings and evaluate them.
//!
//! Every setting can come from a flag or from a `key=value` file given with
//! `--config`; flags win. The seed can also be set with `SUBNOISE_SEED`.
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

mod commands;
mod config;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::UsageError;
use crate::spec::{NoiseSpec, Subsample};

#[derive(Parser, Debug)]
#[command(name = "subnoise", version, about = "Word embeddings with sub-sampled noise distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count words of a corpus and write the ranked vocabulary.
    BuildVocab(BuildVocabArgs),
    /// Fit Zipf's law to a vocabulary and report the adaptive rate t_c.
    FitZipf(FitZipfArgs),
    /// Write a noise distribution as word, alpha, probability lines.
    NoiseTable(NoiseTableArgs),
    /// Train skip-gram or CBOW vectors.
    Train(TrainArgs),
    /// Correlate cosine similarities with human similarity scores.
    EvalSim(EvalArgs),
    /// Solve analogy questions with 3CosAdd.
    EvalAnalogy(EvalArgs),
    /// Answer multiple-choice synonym questions.
    EvalSyn(EvalArgs),
    /// Answer sentence-completion questions.
    EvalCompletion(EvalCompletionArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// key=value settings file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildVocabArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct FitZipfArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    vocab: Option<String>,
    /// wlse1, wlse2 or search.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug)]
struct NoiseTableArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    vocab: Option<String>,
    /// uniform, unigram, smoothed:<power> or subsampled:wlse1|wlse2|search|manual:<t_c>.
    #[arg(long)]
    noise: Option<NoiseSpec>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    corpus: Option<String>,
    /// Vocabulary file; built from the corpus with --min-count when absent.
    #[arg(long)]
    vocab: Option<String>,
    #[arg(long)]
    min_count: Option<u64>,
    /// Input-vector file to write.
    #[arg(long)]
    out: Option<String>,
    /// Also write the output (context) vectors here.
    #[arg(long)]
    output_vectors: Option<String>,
    /// Write word2vec binary instead of text.
    #[arg(long)]
    binary: bool,
    /// sg or cbow.
    #[arg(long)]
    model: Option<subnoise::Model>,
    /// ns or nce.
    #[arg(long)]
    objective: Option<subnoise::Objective>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Corpus sub-sampling rate, or none.
    #[arg(long)]
    subsample: Option<Subsample>,
    #[arg(long)]
    noise: Option<NoiseSpec>,
    #[arg(long, env = "SUBNOISE_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Print progress to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    vectors: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args, Debug)]
struct EvalCompletionArgs {
    #[command(flatten)]
    common: Common,
    /// Input vectors (candidates).
    #[arg(long)]
    vectors: Option<String>,
    /// Output vectors (context words).
    #[arg(long)]
    output_vectors: Option<String>,
    #[arg(long)]
    vocab: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
    /// cm, cms or swm.
    #[arg(long)]
    mode: Option<subnoise::eval::CompletionMode>,
    /// Sub-sampling rate for cms/swm.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, env = "SUBNOISE_SEED")]
    seed: Option<u64>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use subnoise::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidConfig(_) => 1,
                E::Domain { .. } | E::DegenerateFit(_) | E::UndefinedCorrelation(_) | E::Numeric(_) => 3,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
