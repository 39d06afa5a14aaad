//! Skip-gram and CBOW training with negative sampling or NCE.
//!
//! Training follows the reference word2vec tool: every epoch streams the
//! corpus in chunks of at most [`MAX_CHUNK`] tokens, sub-samples frequent
//! words on the fly, draws an effective window uniformly from `1..=window`
//! per position, and decays the learning rate linearly with the number of
//! processed tokens. Skip-gram uses each context word as input and the centre
//! word as the predicted output.
//!
//! With more than one worker, updates are applied without locking and the
//! result depends on thread scheduling. A single worker is bit-deterministic
//! for a fixed seed.

mod matrices;
mod step;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use rand::Rng;

use crate::corpus::{keep_probabilities, retain, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::noise::{AliasSampler, NoiseTable};
use crate::seeded_rng;

pub use matrices::{EmbeddingMatrices, Real};
pub use step::{
    draw_negatives, nce_pair_step, nce_update, ns_pair_step, ns_update, StepScratch,
};

use matrices::{cast, SharedParams};

/// Longest run of tokens trained as one unit.
pub const MAX_CHUNK: usize = 1000;

/// The learning rate never drops below this fraction of its initial value.
pub const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    SkipGram,
    Cbow,
}

impl Model {
    pub fn default_lr(self) -> f64 {
        match self {
            Model::SkipGram => 0.025,
            Model::Cbow => 0.05,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::SkipGram => "sg",
            Model::Cbow => "cbow",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sg" | "skipgram" | "skip-gram" => Ok(Model::SkipGram),
            "cbow" => Ok(Model::Cbow),
            other => Err(Error::InvalidConfig(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    NegativeSampling,
    Nce,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::NegativeSampling => "ns",
            Objective::Nce => "nce",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ns" | "neg" | "negative-sampling" => Ok(Objective::NegativeSampling),
            "nce" => Ok(Objective::Nce),
            other => Err(Error::InvalidConfig(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub model: Model,
    pub objective: Objective,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub epochs: usize,
    /// Corpus sub-sampling rate; `None` disables sub-sampling.
    pub subsample: Option<f64>,
    pub seed: u64,
    pub workers: usize,
}

impl TrainConfig {
    /// 100 dimensions, window 5, 10 negatives, 2 epochs, sub-sampling 1e-4
    /// and the model's usual initial learning rate.
    pub fn new(model: Model) -> Self {
        TrainConfig {
            model,
            objective: Objective::NegativeSampling,
            dim: 100,
            window: 5,
            negatives: 10,
            initial_lr: model.default_lr(),
            epochs: 2,
            subsample: Some(1e-4),
            seed: 1,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.dim < 1 {
            return bad("dim must be >= 1");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial learning rate must be > 0");
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if self.workers < 1 {
            return bad("workers must be >= 1");
        }
        if self.objective == Objective::Nce && self.negatives < 1 {
            return bad("NCE needs at least one noise sample");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return bad("sub-sampling rate must be > 0");
            }
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(Model::SkipGram)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Progress {
    pub epoch: usize,
    pub tokens_processed: u64,
    pub tokens_total: u64,
    pub lr: f64,
    /// Running mean loss per trained example.
    pub avg_loss: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub tokens_processed: u64,
    pub examples: u64,
    pub avg_loss: f64,
}

/// Effective window for one position: uniform on `1..=window`.
#[inline]
pub fn effective_window<R: Rng + ?Sized>(rng: &mut R, window: usize) -> usize {
    window - rng.random_range(0..window)
}

/// Learning rate after `processed` of `total` tokens.
pub fn learning_rate(initial: f64, processed: u64, total: u64) -> f64 {
    let frac = 1.0 - processed as f64 / (total as f64 + 1.0);
    initial * frac.max(MIN_LR_FRACTION)
}

pub fn train<F: Real>(
    stream: &TokenStream,
    vocab: &Vocabulary,
    noise: &NoiseTable,
    config: &TrainConfig,
) -> Result<(EmbeddingMatrices<F>, TrainReport)> {
    train_with_progress(stream, vocab, noise, config, &|_| {})
}

/// [`train`] with a callback invoked periodically from the workers.
pub fn train_with_progress<F: Real>(
    stream: &TokenStream,
    vocab: &Vocabulary,
    noise: &NoiseTable,
    config: &TrainConfig,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<(EmbeddingMatrices<F>, TrainReport)> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    stream.validate(vocab.len())?;
    if noise.len() != vocab.len() {
        return Err(Error::InvalidConfig(format!(
            "noise table has {} entries for a vocabulary of {}",
            noise.len(),
            vocab.len()
        )));
    }

    let mut emb = EmbeddingMatrices::<F>::init(vocab.len(), config.dim, config.seed);
    let keep = match config.subsample {
        Some(t) => Some(keep_probabilities(vocab, t)?),
        None => None,
    };
    let shards = shard_chunks(&chunks(stream), config.workers);
    let shared = Shared {
        config,
        stream,
        keep: keep.as_deref(),
        sampler: AliasSampler::from_table(noise),
        nce_probs: (config.objective == Objective::Nce).then(|| noise.probs()),
        tokens_total: stream.len() as u64 * config.epochs as u64,
        processed: AtomicU64::new(0),
        abort: AtomicBool::new(false),
        progress,
        totals: Mutex::new((0.0, 0)),
    };

    let params = emb.shared();
    let results: Vec<Result<()>> = if shards.len() == 1 {
        vec![shared.run_worker(&params, 0, &shards[0])]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = shards
                .iter()
                .enumerate()
                .map(|(w, shard)| {
                    let (shared, params) = (&shared, &params);
                    s.spawn(move || shared.run_worker(params, w, shard))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        })
    };
    drop(params);
    results.into_iter().collect::<Result<Vec<()>>>()?;

    if !emb.is_finite() {
        return Err(Error::Numeric(
            "embedding matrices contain NaN or infinite values after training".into(),
        ));
    }
    let (loss, examples) = *shared.totals.lock().unwrap();
    let report = TrainReport {
        tokens_processed: shared.processed.load(Ordering::Relaxed),
        examples,
        avg_loss: if examples > 0 { loss / examples as f64 } else { 0.0 },
    };
    Ok((emb, report))
}

/// Split sentences into `(start, end)` ranges of at most `MAX_CHUNK` tokens.
fn chunks(stream: &TokenStream) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for &end in stream.sentence_ends() {
        let mut s = start;
        while s < end {
            let e = (s + MAX_CHUNK).min(end);
            out.push((s, e));
            s = e;
        }
        start = end;
    }
    out
}

/// Contiguous shards with roughly equal token counts.
fn shard_chunks(chunks: &[(usize, usize)], workers: usize) -> Vec<Vec<(usize, usize)>> {
    let total: usize = chunks.iter().map(|(s, e)| e - s).sum();
    let workers = workers.clamp(1, chunks.len().max(1));
    let per = total.div_ceil(workers);
    let mut shards = vec![Vec::new(); workers];
    let mut seen = 0;
    for &c in chunks {
        let w = (seen / per.max(1)).min(workers - 1);
        shards[w].push(c);
        seen += c.1 - c.0;
    }
    shards.retain(|s| !s.is_empty());
    shards
}

struct Shared<'a> {
    config: &'a TrainConfig,
    stream: &'a TokenStream,
    keep: Option<&'a [f64]>,
    sampler: AliasSampler,
    nce_probs: Option<&'a [f64]>,
    tokens_total: u64,
    processed: AtomicU64,
    abort: AtomicBool,
    progress: &'a (dyn Fn(&Progress) + Sync),
    totals: Mutex<(f64, u64)>,
}

const REPORT_EVERY: u64 = 100_000;

impl Shared<'_> {
    fn run_worker<F: Real>(
        &self,
        params: &SharedParams<'_, F>,
        worker: usize,
        shard: &[(usize, usize)],
    ) -> Result<()> {
        let cfg = self.config;
        let mut rng = seeded_rng(cfg.seed, worker as u64);
        let mut scratch = StepScratch::<F>::new(cfg.dim);
        let mut sentence: Vec<usize> = Vec::with_capacity(MAX_CHUNK);
        let mut context: Vec<usize> = Vec::with_capacity(2 * cfg.window);
        let (mut loss, mut examples) = (0.0f64, 0u64);
        let mut since_report = 0u64;

        for epoch in 0..cfg.epochs {
            for &(start, end) in shard {
                if self.abort.load(Ordering::Relaxed) {
                    return Ok(());
                }
                let processed = self
                    .processed
                    .fetch_add((end - start) as u64, Ordering::Relaxed);
                let lr64 = learning_rate(cfg.initial_lr, processed, self.tokens_total);
                let lr: F = cast(lr64);

                sentence.clear();
                let ids = &self.stream.ids()[start..end];
                match self.keep {
                    Some(keep) => sentence.extend(
                        ids.iter()
                            .map(|&i| i as usize)
                            .filter(|&i| retain(keep[i], &mut rng)),
                    ),
                    None => sentence.extend(ids.iter().map(|&i| i as usize)),
                }

                let chunk_loss_start = loss;
                for pos in 0..sentence.len() {
                    let b = effective_window(&mut rng, cfg.window);
                    let lo = pos.saturating_sub(b);
                    let hi = (pos + b + 1).min(sentence.len());
                    let center = sentence[pos];
                    match cfg.model {
                        Model::SkipGram => {
                            for ctx in (lo..hi).filter(|&j| j != pos) {
                                loss += scratch.sampled_step(
                                    params,
                                    &[sentence[ctx]],
                                    center,
                                    &self.sampler,
                                    self.nce_probs,
                                    &mut rng,
                                    cfg.negatives,
                                    lr,
                                );
                                examples += 1;
                            }
                        }
                        Model::Cbow => {
                            context.clear();
                            context.extend((lo..hi).filter(|&j| j != pos).map(|j| sentence[j]));
                            if context.is_empty() {
                                continue;
                            }
                            loss += scratch.sampled_step(
                                params,
                                &context,
                                center,
                                &self.sampler,
                                self.nce_probs,
                                &mut rng,
                                cfg.negatives,
                                lr,
                            );
                            examples += 1;
                        }
                    }
                }

                if !loss.is_finite() {
                    self.abort.store(true, Ordering::Relaxed);
                    return Err(Error::Numeric(format!(
                        "non-finite loss in worker {worker}, epoch {}, tokens {start}..{end} \
                         (lr {lr64:.6e}, loss before chunk {chunk_loss_start})",
                        epoch + 1
                    )));
                }

                since_report += (end - start) as u64;
                if since_report >= REPORT_EVERY {
                    since_report = 0;
                    (self.progress)(&Progress {
                        epoch: epoch + 1,
                        tokens_processed: processed + (end - start) as u64,
                        tokens_total: self.tokens_total,
                        lr: lr64,
                        avg_loss: if examples > 0 { loss / examples as f64 } else { 0.0 },
                    });
                }
            }
        }
        let mut totals = self.totals.lock().unwrap();
        totals.0 += loss;
        totals.1 += examples;
        Ok(())
    }
}
