//! Noise distributions for negative sampling and NCE, and an alias-method
//! sampler over them.

use std::fmt;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{check_rate, keep_probability_unchecked, Vocabulary};
use crate::error::{Error, Result};
use crate::format::sig10;
use crate::seeded_rng;

/// Where the sub-sampling rate of a sub-sampled table came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateSource {
    Wlse1,
    Wlse2,
    Search,
    Manual,
}

impl fmt::Display for RateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateSource::Wlse1 => "wlse1",
            RateSource::Wlse2 => "wlse2",
            RateSource::Search => "search",
            RateSource::Manual => "manual",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseKind {
    Uniform,
    Unigram,
    Smoothed { power: f64 },
    Subsampled { t_c: f64, source: RateSource },
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::Uniform => f.write_str("uniform"),
            NoiseKind::Unigram => f.write_str("unigram"),
            NoiseKind::Smoothed { power } => write!(f, "smoothed:{power}"),
            NoiseKind::Subsampled { t_c, source } => write!(f, "subsampled:{source}:{t_c:e}"),
        }
    }
}

/// Per-word noise probabilities together with the sub-sampling weights used
/// to derive them.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTable {
    probs: Vec<f64>,
    alphas: Vec<f64>,
    kind: NoiseKind,
}

impl NoiseTable {
    fn from_weights(weights: Vec<f64>, alphas: Vec<f64>, kind: NoiseKind) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Numeric(format!(
                "noise weights sum to {total}; cannot normalize"
            )));
        }
        let probs: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        if let Some(i) = probs.iter().position(|&p| !(p > 0.0)) {
            return Err(Error::Numeric(format!(
                "noise probability of word {i} underflowed to zero"
            )));
        }
        Ok(NoiseTable {
            probs,
            alphas,
            kind,
        })
    }

    /// Build a table from explicit probabilities; they are renormalized.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(&p) = probs.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::Domain {
                name: "probability",
                value: p,
                expected: "finite and > 0",
            });
        }
        let n = probs.len();
        Self::from_weights(probs, vec![1.0; n], NoiseKind::Unigram)
    }

    pub fn uniform(vocab: &Vocabulary) -> Result<Self> {
        let n = vocab.len();
        Self::from_weights(vec![1.0; n], vec![1.0; n], NoiseKind::Uniform)
    }

    pub fn unigram(vocab: &Vocabulary) -> Result<Self> {
        Self::from_weights(
            raw_counts(vocab),
            vec![1.0; vocab.len()],
            NoiseKind::Unigram,
        )
    }

    /// Counts raised to `power` (0.75 in the classic word2vec setup).
    ///
    /// Power 1 gives the unigram distribution and power 0 the uniform one,
    /// both bit-for-bit.
    pub fn smoothed_unigram(vocab: &Vocabulary, power: f64) -> Result<Self> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::Domain {
                name: "power",
                value: power,
                expected: ">= 0",
            });
        }
        let weights = if power == 1.0 {
            raw_counts(vocab)
        } else if power == 0.0 {
            vec![1.0; vocab.len()]
        } else {
            vocab
                .counts()
                .iter()
                .map(|&c| (c as f64).powf(power))
                .collect()
        };
        Self::from_weights(
            weights,
            vec![1.0; vocab.len()],
            NoiseKind::Smoothed { power },
        )
    }

    /// Unigram counts scaled by `alpha_i = min(keep(f̂_i, t_c), 1)`.
    pub fn subsampled_unigram(vocab: &Vocabulary, t_c: f64, source: RateSource) -> Result<Self> {
        check_rate(t_c).map_err(|_| Error::Domain {
            name: "t_c",
            value: t_c,
            expected: "> 0",
        })?;
        let alphas: Vec<f64> = (0..vocab.len())
            .map(|i| keep_probability_unchecked(vocab.frequency(i), t_c).min(1.0))
            .collect();
        let weights = alphas
            .iter()
            .zip(vocab.counts())
            .map(|(&a, &c)| a * c as f64)
            .collect();
        Self::from_weights(weights, alphas, NoiseKind::Subsampled { t_c, source })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// `word\talpha\tprob` lines in rank order.
    pub fn write_dump<W: Write>(&self, vocab: &Vocabulary, mut w: W) -> std::io::Result<()> {
        for (i, word) in vocab.words().iter().enumerate().take(self.len()) {
            writeln!(
                w,
                "{word}\t{}\t{}",
                sig10(self.alphas[i]),
                sig10(self.probs[i])
            )?;
        }
        w.flush()
    }
}

fn raw_counts(vocab: &Vocabulary) -> Vec<f64> {
    vocab.counts().iter().map(|&c| c as f64).collect()
}

/// Walker/Vose alias table. Each draw costs one uniform index and one uniform
/// real.
#[derive(Clone, Debug)]
pub struct AliasSampler {
    threshold: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasSampler {
    pub fn new(probs: &[f64]) -> Self {
        assert!(!probs.is_empty(), "alias table over an empty distribution");
        let n = probs.len();
        let total: f64 = probs.iter().sum();
        let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64 / total).collect();
        let mut threshold = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();

        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            threshold[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            threshold[i] = 1.0;
            alias[i] = i as u32;
        }
        AliasSampler { threshold, alias }
    }

    pub fn from_table(table: &NoiseTable) -> Self {
        Self::new(table.probs())
    }

    pub fn len(&self) -> usize {
        self.threshold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threshold.is_empty()
    }

    /// Exact probability of drawing `idx`, reconstructed from the tables.
    pub fn probability(&self, idx: usize) -> f64 {
        let n = self.len() as f64;
        let own = self.threshold[idx];
        let aliased: f64 = self
            .alias
            .iter()
            .zip(&self.threshold)
            .enumerate()
            .filter(|&(j, (&a, _))| a as usize == idx && j != idx)
            .map(|(_, (_, &t))| 1.0 - t)
            .sum();
        (own + aliased) / n
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.threshold.len());
        if rng.random::<f64>() < self.threshold[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

/// An alias sampler bundled with its own seeded random stream.
#[derive(Clone, Debug)]
pub struct SeededSampler {
    sampler: AliasSampler,
    rng: ChaCha8Rng,
}

impl SeededSampler {
    pub fn sampler(&self) -> &AliasSampler {
        &self.sampler
    }

    pub fn draw(&mut self) -> usize {
        self.sampler.sample(&mut self.rng)
    }
}

impl Iterator for SeededSampler {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.draw())
    }
}

pub fn build_sampler(table: &NoiseTable, seed: u64) -> SeededSampler {
    SeededSampler {
        sampler: AliasSampler::from_table(table),
        rng: seeded_rng(seed, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(entries: &[(&str, u64)]) -> Vocabulary {
        let total = entries.iter().map(|e| e.1).sum();
        Vocabulary::from_entries(
            entries.iter().map(|&(w, c)| (w.to_owned(), c)).collect(),
            total,
            1,
        )
        .unwrap()
    }

    #[test]
    fn smoothed_three_quarters() {
        let v = vocab(&[("a", 16), ("b", 81)]);
        let t = NoiseTable::smoothed_unigram(&v, 0.75).unwrap();
        let (b, a) = (t.prob(0), t.prob(1));
        assert!((a - 8.0 / 35.0).abs() < 1e-12);
        assert!((b - 27.0 / 35.0).abs() < 1e-12);
    }

    #[test]
    fn smoothed_power_extremes() {
        let v = vocab(&[("a", 3), ("b", 1)]);
        let t = NoiseTable::smoothed_unigram(&v, 1.0).unwrap();
        assert_eq!(t.probs(), &[0.75, 0.25]);
        assert_eq!(t.probs(), NoiseTable::unigram(&v).unwrap().probs());
        let u = NoiseTable::smoothed_unigram(&v, 0.0).unwrap();
        assert_eq!(u.probs(), &[0.5, 0.5]);
        assert!(NoiseTable::smoothed_unigram(&v, -0.5).is_err());
    }

    #[test]
    fn subsampled_hand_case() {
        let v = vocab(&[("the", 1000), ("cat", 10), ("mat", 10)]);
        let t = NoiseTable::subsampled_unigram(&v, 0.01, RateSource::Manual).unwrap();
        assert!((t.alphas()[0] - 0.111_195).abs() < 1e-6);
        assert_eq!(&t.alphas()[1..], &[1.0, 1.0]);
        assert!((t.prob(0) - 0.84756).abs() < 1e-5);
        assert!((t.prob(1) - 0.07622).abs() < 1e-5);
        assert_eq!(t.prob(1), t.prob(2));
        assert!(NoiseTable::subsampled_unigram(&v, 0.0, RateSource::Manual).is_err());
    }

    #[test]
    fn subsampled_large_rate_is_unigram() {
        let v = vocab(&[("a", 700), ("b", 200), ("c", 99), ("d", 1)]);
        let t = NoiseTable::subsampled_unigram(&v, 10.0, RateSource::Manual).unwrap();
        assert_eq!(t.probs(), NoiseTable::unigram(&v).unwrap().probs());
    }

    #[test]
    fn alias_degenerate_and_deterministic() {
        let t = NoiseTable::from_probs(vec![1.0]).unwrap();
        assert!(build_sampler(&t, 1).take(100).all(|i| i == 0));

        let t = NoiseTable::from_probs(vec![0.2, 0.3, 0.5]).unwrap();
        let a: Vec<_> = build_sampler(&t, 7).take(50).collect();
        let b: Vec<_> = build_sampler(&t, 7).take(50).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn alias_tables_reconstruct_probabilities() {
        let probs = [0.05, 0.1, 0.4, 0.15, 0.3];
        let s = AliasSampler::new(&probs);
        for (i, &p) in probs.iter().enumerate() {
            assert!((s.probability(i) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn dump_format() {
        let v = vocab(&[("a", 3), ("b", 1)]);
        let t = NoiseTable::unigram(&v).unwrap();
        let mut buf = Vec::new();
        t.write_dump(&v, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a\t1.000000000\t0.7500000000\nb\t1.000000000\t0.2500000000\n"
        );
    }
}
