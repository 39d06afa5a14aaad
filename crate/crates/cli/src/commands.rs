use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use subnoise::corpus::{for_each_line_tokens, VocabBuilder};
use subnoise::eval::{
    eval_analogy, eval_completion, eval_similarity, eval_synonym, AnalogyDataset,
    CompletionDataset, CompletionMode, CompletionOptions, SimilarityDataset, SynonymDataset,
};
use subnoise::format::sig10;
use subnoise::trainer::{train_with_progress, Model, Objective, Progress, TrainConfig};
use subnoise::zipf::{adaptive_rate, fit_report, CriticalSource};
use subnoise::{Embeddings, NoiseTable, TokenStream, Vocabulary};

use crate::config::{usage, Resolver};
use crate::spec::{NoiseSpec, SubRate, Subsample};
use crate::{
    BuildVocabArgs, Command, EvalArgs, EvalCompletionArgs, FitZipfArgs, NoiseTableArgs, TrainArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildVocab(a) => build_vocab(a),
        Command::FitZipf(a) => fit_zipf(a),
        Command::NoiseTable(a) => noise_table(a),
        Command::Train(a) => train(a),
        Command::EvalSim(a) => eval_sim(a),
        Command::EvalAnalogy(a) => eval_analogy_cmd(a),
        Command::EvalSyn(a) => eval_syn(a),
        Command::EvalCompletion(a) => eval_completion_cmd(a),
    }
}

fn open(path: &str) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {path}"))?;
    Ok(BufReader::new(file))
}

/// Write through a temporary file so that a failed run leaves nothing behind.
fn write_file(path: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let tmp = PathBuf::from(format!("{path}.tmp"));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {path}"))
}

fn write_echo(out: &str, resolver: &Resolver, command: &str) -> Result<()> {
    let echo = resolver.echo(command);
    write_file(&format!("{out}.conf"), |w| w.write_all(echo.as_bytes()))
}

/// Report for stdout: the resolved settings as `#` lines, then the results.
fn report(resolver: &Resolver, command: &str, body: &str) {
    let mut out = String::new();
    for line in resolver.echo(command).lines() {
        out += &format!("# {line}\n");
    }
    out += body;
    print!("{out}");
}

fn load_vocab(path: &str) -> Result<Vocabulary> {
    Vocabulary::read(open(path)?).with_context(|| format!("reading vocabulary {path}"))
}

fn count_corpus(path: &str, min_count: u64) -> Result<Vocabulary> {
    let mut builder = VocabBuilder::new();
    for_each_line_tokens(open(path)?, |tokens| builder.extend(tokens))
        .with_context(|| format!("reading corpus {path}"))?;
    Ok(builder.build(min_count)?)
}

fn load_vectors(path: &str) -> Result<Embeddings> {
    let bytes = std::fs::read(path).with_context(|| format!("reading vectors {path}"))?;
    Embeddings::read_text(&bytes[..])
        .or_else(|_| Embeddings::read_binary(&bytes[..]))
        .with_context(|| format!("parsing vectors {path}"))
}

fn load_dataset<T>(path: &str, parse: impl FnOnce(BufReader<File>) -> subnoise::Result<T>) -> Result<T> {
    parse(open(path)?).with_context(|| format!("reading dataset {path}"))
}

fn build_vocab(a: BuildVocabArgs) -> Result<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let corpus: String = r.required("corpus", a.corpus)?;
    let min_count = r.with_default("min-count", a.min_count, 5u64)?;
    let out: String = r.required("out", a.out)?;
    r.finish()?;
    if min_count < 1 {
        return Err(usage("--min-count must be >= 1"));
    }
    let vocab = count_corpus(&corpus, min_count)?;
    r.note("words", vocab.len());
    r.note("total-tokens", vocab.total_tokens());
    write_file(&out, |w| vocab.write(w))?;
    write_echo(&out, &r, "build-vocab")
}

fn fit_zipf(a: FitZipfArgs) -> Result<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let vocab_path: String = r.required("vocab", a.vocab)?;
    let method: String = r.with_default("method", a.method, "wlse2".into())?;
    r.finish()?;
    let source = match method.as_str() {
        "search" => CriticalSource::Search,
        m => CriticalSource::Fit(m.parse().map_err(|e: subnoise::Error| usage(e.to_string()))?),
    };
    let vocab = load_vocab(&vocab_path)?;
    let (fit, crit) = adaptive_rate(&vocab, source)?;
    report(&r, "fit-zipf", &fit_report(fit.as_ref(), source, &crit));
    Ok(())
}

/// Noise table for `spec`, recording the derived rate in the resolver.
fn make_noise(vocab: &Vocabulary, spec: NoiseSpec, r: &mut Resolver) -> Result<NoiseTable> {
    Ok(match spec {
        NoiseSpec::Uniform => NoiseTable::uniform(vocab)?,
        NoiseSpec::Unigram => NoiseTable::unigram(vocab)?,
        NoiseSpec::Smoothed(p) => NoiseTable::smoothed_unigram(vocab, p)?,
        NoiseSpec::Subsampled(rate) => {
            let t_c = match (rate, rate.critical_source()) {
                (SubRate::Manual(t), _) => t,
                (_, Some(source)) => {
                    let (fit, crit) = adaptive_rate(vocab, source)?;
                    if let Some(fit) = fit {
                        r.note("beta-hat", sig10(fit.beta_hat));
                        r.note("gamma-hat", sig10(fit.gamma_hat));
                    }
                    crit.t_c
                }
                (_, None) => unreachable!("only manual rates lack a source"),
            };
            r.note("t-c", sig10(t_c));
            NoiseTable::subsampled_unigram(vocab, t_c, rate.source())?
        }
    })
}

fn noise_table(a: NoiseTableArgs) -> Result<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let vocab_path: String = r.required("vocab", a.vocab)?;
    let spec = r.with_default("noise", a.noise, NoiseSpec::Smoothed(0.75))?;
    let out: String = r.required("out", a.out)?;
    r.finish()?;
    let vocab = load_vocab(&vocab_path)?;
    let table = make_noise(&vocab, spec, &mut r)?;
    write_file(&out, |w| table.write_dump(&vocab, w))?;
    write_echo(&out, &r, "noise-table")
}

fn train(a: TrainArgs) -> Result<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let corpus: String = r.required("corpus", a.corpus)?;
    let vocab_path: Option<String> = r.value("vocab", a.vocab, None)?;
    let min_count = r.with_default("min-count", a.min_count, 5u64)?;
    let out: String = r.required("out", a.out)?;
    let output_vectors: Option<String> = r.value("output-vectors", a.output_vectors, None)?;
    let binary = r.switch("binary", a.binary)?;
    let model = r.with_default("model", a.model, Model::SkipGram)?;
    let defaults = TrainConfig::new(model);
    let config = TrainConfig {
        model,
        objective: r.with_default("objective", a.objective, Objective::NegativeSampling)?,
        dim: r.with_default("dim", a.dim, defaults.dim)?,
        window: r.with_default("window", a.window, defaults.window)?,
        negatives: r.with_default("negatives", a.negatives, defaults.negatives)?,
        initial_lr: r.with_default("lr", a.lr, defaults.initial_lr)?,
        epochs: r.with_default("epochs", a.epochs, defaults.epochs)?,
        subsample: r.with_default("subsample", a.subsample, Subsample(defaults.subsample))?.0,
        seed: r.with_default("seed", a.seed, defaults.seed)?,
        workers: r.with_default("workers", a.workers, defaults.workers)?,
    };
    let noise = r.with_default("noise", a.noise, NoiseSpec::Smoothed(0.75))?;
    let verbose = r.switch("verbose", a.verbose)?;
    r.finish()?;
    config.validate().map_err(|e| usage(e.to_string()))?;

    let vocab = match &vocab_path {
        Some(p) => load_vocab(p)?,
        None => count_corpus(&corpus, min_count)?,
    };
    let stream = TokenStream::from_reader(open(&corpus)?, &vocab)
        .with_context(|| format!("reading corpus {corpus}"))?;
    let table = make_noise(&vocab, noise, &mut r)?;
    r.note("words", vocab.len());
    r.note("stream-tokens", stream.len());

    let progress = |p: &Progress| {
        if verbose {
            eprintln!(
                "epoch {} tokens {}/{} lr {:.6} loss {:.4}",
                p.epoch + 1,
                p.tokens_processed,
                p.tokens_total,
                p.lr,
                p.avg_loss
            );
        }
    };
    let (m, summary) = train_with_progress::<f32>(&stream, &vocab, &table, &config, &progress)?;
    r.note("examples", summary.examples);
    r.note("avg-loss", sig10(summary.avg_loss));

    let write_vectors = |path: &str, emb: Embeddings| {
        write_file(path, |w| if binary { emb.write_binary(w) } else { emb.write_text(w) })
    };
    write_vectors(&out, Embeddings::from_input(vocab.words(), &m)?)?;
    if let Some(path) = &output_vectors {
        write_vectors(path, Embeddings::from_output(vocab.words(), &m)?)?;
    }
    write_echo(&out, &r, "train")?;
    if verbose {
        eprintln!(
            "trained {} examples, average loss {:.4}",
            summary.examples, summary.avg_loss
        );
    }
    Ok(())
}

fn eval_inputs(a: EvalArgs) -> Result<(Resolver, String, String)> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let vectors: String = r.required("vectors", a.vectors)?;
    let dataset: String = r.required("dataset", a.dataset)?;
    r.finish()?;
    Ok((r, vectors, dataset))
}

fn metric(name: &str, value: impl std::fmt::Display) -> String {
    format!("{name}\t{value}\n")
}

fn eval_sim(a: EvalArgs) -> Result<()> {
    let (r, vectors, dataset) = eval_inputs(a)?;
    let ds = load_dataset(&dataset, SimilarityDataset::parse)?;
    let emb = load_vectors(&vectors)?;
    let res = eval_similarity(&ds, &emb)?;
    let mut body = metric("pearson", sig10(res.pearson));
    body += &metric("spearman", res.spearman.map_or("undefined".into(), sig10));
    body += &metric("used", res.used);
    body += &metric("skipped", res.skipped);
    report(&r, "eval-sim", &body);
    Ok(())
}

fn eval_analogy_cmd(a: EvalArgs) -> Result<()> {
    let (r, vectors, dataset) = eval_inputs(a)?;
    let ds = load_dataset(&dataset, AnalogyDataset::parse)?;
    let emb = load_vectors(&vectors)?;
    let res = eval_analogy(&ds, &emb);
    let total = res.total();
    let mut body = metric("semantic_accuracy", sig10(res.semantic.accuracy()));
    body += &metric("syntactic_accuracy", sig10(res.syntactic.accuracy()));
    body += &metric("total_accuracy", sig10(total.accuracy()));
    body += &metric("semantic_used", res.semantic.total);
    body += &metric("syntactic_used", res.syntactic.total);
    body += &metric("used", total.total);
    body += &metric("skipped", res.skipped);
    report(&r, "eval-analogy", &body);
    Ok(())
}

fn eval_syn(a: EvalArgs) -> Result<()> {
    let (r, vectors, dataset) = eval_inputs(a)?;
    let ds = load_dataset(&dataset, SynonymDataset::parse)?;
    let emb = load_vectors(&vectors)?;
    let res = eval_synonym(&ds, &emb);
    let mut body = metric("accuracy", sig10(res.accuracy.accuracy()));
    body += &metric("used", res.accuracy.total);
    body += &metric("skipped", res.skipped);
    report(&r, "eval-syn", &body);
    Ok(())
}

fn eval_completion_cmd(a: EvalCompletionArgs) -> Result<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let vectors: String = r.required("vectors", a.vectors)?;
    let output_vectors: String = r.required("output-vectors", a.output_vectors)?;
    let vocab_path: String = r.required("vocab", a.vocab)?;
    let dataset: String = r.required("dataset", a.dataset)?;
    let defaults = CompletionOptions::default();
    let options = CompletionOptions {
        mode: r.with_default("mode", a.mode, CompletionMode::Cm)?,
        t: r.with_default("t", a.t, defaults.t)?,
        repeats: r.with_default("repeats", a.repeats, defaults.repeats)?,
        seed: r.with_default("seed", a.seed, defaults.seed)?,
    };
    r.finish()?;
    let ds = load_dataset(&dataset, CompletionDataset::parse)?;
    let vocab = load_vocab(&vocab_path)?;
    let input = load_vectors(&vectors)?;
    let output = load_vectors(&output_vectors)?;
    let res = eval_completion(&ds, &input, &output, &vocab, &options)?;
    let mut body = metric("accuracy", sig10(res.accuracy.accuracy()));
    body += &metric("used", res.accuracy.total);
    body += &metric("skipped", res.skipped);
    report(&r, "eval-completion", &body);
    Ok(())
}
