//! Sentence completion by context-word softmax scores.
//!
//! A candidate `c` is scored by how likely the words around the blank are as
//! its context: `sum_{w in S} exp(v'_w . v_c) / sum_{w in V} exp(v'_w . v_c)`.
//! The semantics-weighted variant multiplies each context term by
//! `ln(rank of w)`, and both can be applied to a randomly sub-sampled context.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::Rng;

use super::synonym::parse_answer;
use super::Accuracy;
use crate::corpus::{keep_probabilities, preprocess, retain, Vocabulary};
use crate::error::{Error, Result};
use crate::seeded_rng;
use crate::vectors::{dot64, Embeddings};

pub const BLANK: &str = "___";

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionQuestion {
    /// Sentence tokens with the blank removed.
    pub context: Vec<String>,
    pub candidates: Vec<String>,
    pub answer: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompletionDataset {
    pub questions: Vec<CompletionQuestion>,
}

impl CompletionDataset {
    /// `sentence with ___ | cand1,...,cand5 | answer_index` lines, 0-based
    /// index. The sentence is tokenized like the training corpus.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut questions = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(format!("completion line {line_no}"), e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.rsplitn(3, '|').map(str::trim).collect();
            let [answer, candidates, sentence] = fields[..] else {
                return Err(Error::parse(line_no, "expected sentence | candidates | answer"));
            };
            let Some((left, right)) = sentence.split_once(BLANK) else {
                return Err(Error::parse(line_no, format!("sentence has no {BLANK} blank")));
            };
            let mut context = preprocess(left);
            context.extend(preprocess(right));
            let candidates: Vec<String> =
                candidates.split(',').map(|c| c.trim().to_lowercase()).collect();
            let answer = parse_answer(line_no, answer, candidates.len())?;
            questions.push(CompletionQuestion {
                context,
                candidates,
                answer,
            });
        }
        Ok(CompletionDataset { questions })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletionMode {
    /// Full context, unweighted.
    Cm,
    /// Sub-sampled context, unweighted.
    Cms,
    /// Sub-sampled context weighted by semantic information.
    Swm,
}

impl fmt::Display for CompletionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompletionMode::Cm => "cm",
            CompletionMode::Cms => "cms",
            CompletionMode::Swm => "swm",
        })
    }
}

impl FromStr for CompletionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cm" => Ok(CompletionMode::Cm),
            "cms" | "cm^s" => Ok(CompletionMode::Cms),
            "swm" => Ok(CompletionMode::Swm),
            other => Err(Error::InvalidConfig(format!("unknown completion mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompletionOptions {
    pub mode: CompletionMode,
    /// Sub-sampling rate applied to the context in CMS/SWM modes.
    pub t: f64,
    /// Number of random context draws averaged per candidate.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions {
            mode: CompletionMode::Cm,
            t: 1e-4,
            repeats: 10,
            seed: 1,
        }
    }
}

/// Softmax pieces for one candidate: `exp(d_w - m)` for each context word and
/// the normalizer over the whole vocabulary, with `m` the largest dot product.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateTerms {
    pub context_exp: Vec<f64>,
    pub denom: f64,
}

impl CandidateTerms {
    /// `context` holds row ids into `output`; `candidate` a row id of `input`.
    pub fn new(context: &[usize], candidate: usize, input: &Embeddings, output: &Embeddings) -> Self {
        let v = input.row(candidate);
        let dots: Vec<f64> = (0..output.len()).map(|w| dot64(output.row(w), v)).collect();
        let max = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom = dots.iter().map(|d| (d - max).exp()).sum();
        let context_exp = context.iter().map(|&w| (dots[w] - max).exp()).collect();
        CandidateTerms { context_exp, denom }
    }

    /// Weighted sum over the context positions where `mask` is set (all if
    /// `None`), divided by the normalizer.
    pub fn score(&self, weights: Option<&[f64]>, mask: Option<&[bool]>) -> f64 {
        let mut num = 0.0;
        for (i, &e) in self.context_exp.iter().enumerate() {
            if mask.is_some_and(|m| !m[i]) {
                continue;
            }
            num += match weights {
                Some(w) => w[i] * e,
                None => e,
            };
        }
        num / self.denom
    }
}

/// Plain context score of `candidate` over context rows of `output`.
pub fn cm_score(context: &[usize], candidate: usize, input: &Embeddings, output: &Embeddings) -> f64 {
    CandidateTerms::new(context, candidate, input, output).score(None, None)
}

/// Context score with one weight per context position.
pub fn swm_score(
    context: &[usize],
    weights: &[f64],
    candidate: usize,
    input: &Embeddings,
    output: &Embeddings,
) -> f64 {
    assert_eq!(context.len(), weights.len());
    CandidateTerms::new(context, candidate, input, output).score(Some(weights), None)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompletionResult {
    pub accuracy: Accuracy,
    pub skipped: usize,
}

/// Scores completion questions with input vectors for candidates and output
/// vectors for context words.
pub struct CompletionScorer<'a> {
    input: &'a Embeddings,
    output: &'a Embeddings,
    vocab: &'a Vocabulary,
    /// Semantic weight per vocabulary id; `ln rank` unless overridden.
    weights: Vec<f64>,
}

/// A question resolved against the vocabulary and the embeddings.
#[derive(Clone, Debug)]
struct Resolved {
    rows: Vec<usize>,
    vocab_ids: Vec<usize>,
    candidates: Vec<Option<usize>>,
}

impl<'a> CompletionScorer<'a> {
    pub fn new(input: &'a Embeddings, output: &'a Embeddings, vocab: &'a Vocabulary) -> Self {
        let weights = (0..vocab.len())
            .map(|i| (vocab.rank(i) as f64).ln())
            .collect();
        CompletionScorer {
            input,
            output,
            vocab,
            weights,
        }
    }

    /// Replace the per-word semantic weights (indexed by vocabulary id).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), self.vocab.len());
        self.weights = weights;
        self
    }

    fn resolve(&self, q: &CompletionQuestion) -> Resolved {
        let (mut rows, mut vocab_ids) = (Vec::new(), Vec::new());
        for w in &q.context {
            if let (Some(v), Some(r)) = (self.vocab.id(w), self.output.id(w)) {
                vocab_ids.push(v);
                rows.push(r);
            }
        }
        let candidates = q.candidates.iter().map(|c| self.input.id(c)).collect();
        Resolved {
            rows,
            vocab_ids,
            candidates,
        }
    }

    /// Per-candidate scores (`-inf` for candidates without a vector), or
    /// `None` when the question must be skipped.
    pub fn candidate_scores(
        &self,
        q: &CompletionQuestion,
        options: &CompletionOptions,
        keep: Option<&[f64]>,
        question_index: usize,
    ) -> Option<Vec<f64>> {
        let resolved = self.resolve(q);
        if resolved.rows.is_empty() || resolved.candidates.iter().all(Option::is_none) {
            return None;
        }
        let terms: Vec<Option<CandidateTerms>> = resolved
            .candidates
            .iter()
            .map(|c| c.map(|c| CandidateTerms::new(&resolved.rows, c, self.input, self.output)))
            .collect();
        let weights: Option<Vec<f64>> = (options.mode == CompletionMode::Swm)
            .then(|| resolved.vocab_ids.iter().map(|&v| self.weights[v]).collect());

        let mut scores = vec![0.0; terms.len()];
        match (options.mode, keep) {
            (CompletionMode::Cm, _) | (_, None) => {
                for (s, t) in scores.iter_mut().zip(&terms) {
                    *s = t.as_ref().map_or(0.0, |t| t.score(weights.as_deref(), None));
                }
            }
            (_, Some(keep)) => {
                let mut rng = seeded_rng(options.seed, question_index as u64);
                let mut mask = vec![true; resolved.rows.len()];
                for _ in 0..options.repeats {
                    for (m, &v) in mask.iter_mut().zip(&resolved.vocab_ids) {
                        *m = retain(keep[v], &mut rng);
                    }
                    for (s, t) in scores.iter_mut().zip(&terms) {
                        if let Some(t) = t {
                            *s += t.score(weights.as_deref(), Some(&mask));
                        }
                    }
                }
                let reps = options.repeats as f64;
                scores.iter_mut().for_each(|s| *s /= reps);
            }
        }
        for (s, t) in scores.iter_mut().zip(&terms) {
            if t.is_none() {
                *s = f64::NEG_INFINITY;
            }
        }
        Some(scores)
    }

    pub fn evaluate(
        &self,
        dataset: &CompletionDataset,
        options: &CompletionOptions,
    ) -> Result<CompletionResult> {
        let keep = match options.mode {
            CompletionMode::Cm => None,
            CompletionMode::Cms | CompletionMode::Swm => {
                if options.repeats < 1 {
                    return Err(Error::InvalidConfig("repeats must be >= 1".into()));
                }
                Some(keep_probabilities(self.vocab, options.t)?)
            }
        };
        let mut result = CompletionResult::default();
        for (i, q) in dataset.questions.iter().enumerate() {
            match self.candidate_scores(q, options, keep.as_deref(), i) {
                Some(scores) => {
                    result.accuracy.total += 1;
                    if argmax(&scores) == q.answer {
                        result.accuracy.correct += 1;
                    }
                }
                None => result.skipped += 1,
            }
        }
        Ok(result)
    }
}

/// First index of the maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub fn eval_completion(
    dataset: &CompletionDataset,
    input: &Embeddings,
    output: &Embeddings,
    vocab: &Vocabulary,
    options: &CompletionOptions,
) -> Result<CompletionResult> {
    CompletionScorer::new(input, output, vocab).evaluate(dataset, options)
}

/// Sample a retention mask for `vocab_ids`, the same way the scorer does.
pub fn sample_mask<R: Rng + ?Sized>(vocab_ids: &[usize], keep: &[f64], rng: &mut R) -> Vec<bool> {
    vocab_ids.iter().map(|&v| retain(keep[v], rng)).collect()
}
