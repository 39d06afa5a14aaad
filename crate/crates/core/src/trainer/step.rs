use rand::Rng;

use super::matrices::{axpy, cast, dot, EmbeddingMatrices, Real, SharedParams};
use crate::noise::{AliasSampler, NoiseTable};

/// Redraw limit for a noise word that keeps coinciding with the target.
const MAX_REDRAWS: usize = 16;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Target<F> {
    pub id: usize,
    pub label: F,
    /// Subtracted from the raw score before the sigmoid.
    pub shift: F,
}

/// Reusable buffers for one worker.
#[derive(Clone, Debug, Default)]
pub struct StepScratch<F> {
    hidden: Vec<F>,
    grad: Vec<F>,
    coefs: Vec<F>,
    targets: Vec<Target<F>>,
    negatives: Vec<usize>,
}

impl<F: Real> StepScratch<F> {
    pub fn new(dim: usize) -> Self {
        StepScratch {
            hidden: vec![F::zero(); dim],
            grad: vec![F::zero(); dim],
            coefs: Vec::new(),
            targets: Vec::new(),
            negatives: Vec::new(),
        }
    }
}

#[inline]
fn sigmoid<F: Real>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// One gradient-ascent step on
/// `sum_j label_j ln σ(s_j) + (1 - label_j) ln σ(-s_j)` with
/// `s_j = v'_j · h - shift_j` and `h` the mean of the input rows.
///
/// All scores are computed from the parameters as they were on entry, so the
/// update is `lr` times the exact gradient even when targets repeat. Returns
/// the negative log-likelihood before the update.
pub(crate) fn logistic_step<F: Real>(
    params: &SharedParams<'_, F>,
    inputs: &[usize],
    targets: &[Target<F>],
    lr: F,
    scratch: &mut StepScratch<F>,
) -> f64 {
    if inputs.is_empty() {
        return 0.0;
    }
    let dim = params.dim();
    scratch.hidden.resize(dim, F::zero());
    scratch.grad.resize(dim, F::zero());
    let hidden = &mut scratch.hidden;
    let grad = &mut scratch.grad;

    // SAFETY (all row accesses below): ids come from the vocabulary and each
    // row reference is dropped before the next one is taken.
    if let [single] = inputs {
        hidden.copy_from_slice(unsafe { params.input_row(*single) });
    } else {
        hidden.iter_mut().for_each(|h| *h = F::zero());
        for &i in inputs {
            axpy(F::one(), unsafe { params.input_row(i) }, hidden);
        }
        let scale = F::one() / cast::<F>(inputs.len() as f64);
        hidden.iter_mut().for_each(|h| *h = *h * scale);
    }

    let mut loss = 0.0;
    scratch.coefs.clear();
    for t in targets {
        let s = dot(unsafe { params.output_row(t.id) }, hidden) - t.shift;
        let s64 = s.to_f64().unwrap_or(f64::NAN);
        loss += if t.label > F::zero() {
            softplus(-s64)
        } else {
            softplus(s64)
        };
        scratch.coefs.push(lr * (t.label - sigmoid(s)));
    }

    grad.iter_mut().for_each(|g| *g = F::zero());
    for (t, &g) in targets.iter().zip(&scratch.coefs) {
        axpy(g, unsafe { params.output_row(t.id) }, grad);
    }
    for (t, &g) in targets.iter().zip(&scratch.coefs) {
        axpy(g, hidden, unsafe { params.output_row(t.id) });
    }

    let share = F::one() / cast::<F>(inputs.len() as f64);
    for &i in inputs {
        axpy(share, grad, unsafe { params.input_row(i) });
    }
    loss
}

/// Draw `k` noise words, redrawing any draw equal to `target`.
///
/// A draw that still equals the target after repeated redraws is dropped,
/// which only happens when the target holds nearly all the noise mass.
pub fn draw_negatives<R: Rng + ?Sized>(
    sampler: &AliasSampler,
    rng: &mut R,
    target: usize,
    k: usize,
    out: &mut Vec<usize>,
) {
    out.clear();
    for _ in 0..k {
        for _ in 0..MAX_REDRAWS {
            let w = sampler.sample(rng);
            if w != target {
                out.push(w);
                break;
            }
        }
    }
}

pub(crate) fn ns_targets<F: Real>(output: usize, negatives: &[usize], targets: &mut Vec<Target<F>>) {
    targets.clear();
    targets.push(Target {
        id: output,
        label: F::one(),
        shift: F::zero(),
    });
    targets.extend(negatives.iter().map(|&id| Target {
        id,
        label: F::zero(),
        shift: F::zero(),
    }));
}

/// Targets for NCE: every score is corrected by `ln(k P_n(w))`.
pub(crate) fn nce_targets<F: Real>(
    output: usize,
    noise: &[usize],
    k: usize,
    probs: &[f64],
    targets: &mut Vec<Target<F>>,
) {
    let k = k as f64;
    targets.clear();
    targets.push(Target {
        id: output,
        label: F::one(),
        shift: cast((k * probs[output]).ln()),
    });
    targets.extend(noise.iter().map(|&id| Target {
        id,
        label: F::zero(),
        shift: cast((k * probs[id]).ln()),
    }));
}

/// Negative-sampling step with explicitly given noise words.
///
/// `inputs` holds one word for skip-gram or the context words for CBOW, whose
/// mean is the hidden vector. Returns the loss before the update.
pub fn ns_update<F: Real>(
    emb: &mut EmbeddingMatrices<F>,
    inputs: &[usize],
    output: usize,
    negatives: &[usize],
    lr: F,
) -> f64 {
    let mut scratch = StepScratch::new(emb.dim());
    let mut targets = std::mem::take(&mut scratch.targets);
    ns_targets(output, negatives, &mut targets);
    let params = emb.shared();
    logistic_step(&params, inputs, &targets, lr, &mut scratch)
}

/// NCE step with explicitly given noise words; `k = noise.len()`.
///
/// The partition function is fixed at 1.
pub fn nce_update<F: Real>(
    emb: &mut EmbeddingMatrices<F>,
    inputs: &[usize],
    output: usize,
    noise: &[usize],
    table: &NoiseTable,
    lr: F,
) -> f64 {
    assert!(!noise.is_empty(), "NCE needs at least one noise sample");
    let mut scratch = StepScratch::new(emb.dim());
    let mut targets = std::mem::take(&mut scratch.targets);
    nce_targets(output, noise, noise.len(), table.probs(), &mut targets);
    let params = emb.shared();
    logistic_step(&params, inputs, &targets, lr, &mut scratch)
}

/// Negative-sampling step drawing `k` noise words from `sampler`.
pub fn ns_pair_step<F: Real, R: Rng + ?Sized>(
    emb: &mut EmbeddingMatrices<F>,
    inputs: &[usize],
    output: usize,
    sampler: &AliasSampler,
    rng: &mut R,
    k: usize,
    lr: F,
) -> f64 {
    let mut negatives = Vec::with_capacity(k);
    draw_negatives(sampler, rng, output, k, &mut negatives);
    ns_update(emb, inputs, output, &negatives, lr)
}

/// NCE step drawing `k >= 1` noise words from `sampler` (built over `table`).
#[allow(clippy::too_many_arguments)]
pub fn nce_pair_step<F: Real, R: Rng + ?Sized>(
    emb: &mut EmbeddingMatrices<F>,
    inputs: &[usize],
    output: usize,
    sampler: &AliasSampler,
    table: &NoiseTable,
    rng: &mut R,
    k: usize,
    lr: F,
) -> f64 {
    let mut noise = Vec::with_capacity(k);
    draw_negatives(sampler, rng, output, k, &mut noise);
    if noise.is_empty() {
        return 0.0;
    }
    let mut scratch = StepScratch::new(emb.dim());
    let mut targets = Vec::new();
    nce_targets(output, &noise, k, table.probs(), &mut targets);
    let params = emb.shared();
    logistic_step(&params, inputs, &targets, lr, &mut scratch)
}

impl<F: Real> StepScratch<F> {
    /// Draw negatives into the scratch buffer and run the matching step.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn sampled_step<R: Rng + ?Sized>(
        &mut self,
        params: &SharedParams<'_, F>,
        inputs: &[usize],
        output: usize,
        sampler: &AliasSampler,
        nce_probs: Option<&[f64]>,
        rng: &mut R,
        k: usize,
        lr: F,
    ) -> f64 {
        let mut negatives = std::mem::take(&mut self.negatives);
        let mut targets = std::mem::take(&mut self.targets);
        draw_negatives(sampler, rng, output, k, &mut negatives);
        match nce_probs {
            Some(probs) => nce_targets(output, &negatives, k, probs, &mut targets),
            None => ns_targets(output, &negatives, &mut targets),
        }
        let loss = logistic_step(params, inputs, &targets, lr, self);
        self.negatives = negatives;
        self.targets = targets;
        loss
    }
}
