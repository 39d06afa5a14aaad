//! Word-embedding training with sub-sampled unigram noise distributions.
//!
//! The crate covers the whole pipeline: tokenizing a corpus and ranking its
//! vocabulary ([`corpus`]), fitting Zipf's law to derive an adaptive
//! sub-sampling rate ([`zipf`]), building noise distributions with an exact
//! alias sampler ([`noise`]), skip-gram/CBOW training with negative sampling
//! or NCE ([`trainer`]), word2vec vector files ([`vectors`]) and the
//! evaluation tasks ([`eval`]).

pub mod corpus;
pub mod error;
pub mod eval;
pub mod format;
pub mod noise;
pub mod trainer;
pub mod vectors;
pub mod zipf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use corpus::{TokenStream, Vocabulary};
pub use error::{Error, Result};
pub use noise::{AliasSampler, NoiseKind, NoiseTable, RateSource};
pub use trainer::{EmbeddingMatrices, Model, Objective, TrainConfig};
pub use vectors::Embeddings;
pub use zipf::{CriticalSource, CriticalWord, FitMethod, ZipfFit};

/// Deterministic random stream `stream` derived from a global `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
