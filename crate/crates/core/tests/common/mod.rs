//! Straightforward reference implementations used as test oracles. They are
//! written independently of the library code and favour clarity over speed.

#![allow(dead_code)]

use rand::Rng;
use subnoise::{seeded_rng, Embeddings, Vocabulary};

/// Weighted straight-line fit of `ln f_r` on `ln r` with weights `1/r`,
/// solved through the 2x2 normal equations. Returns `(beta, gamma)`.
pub fn wlse1(freqs: &[f64]) -> (f64, f64) {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, f) in freqs.iter().enumerate() {
        let r = (i + 1) as f64;
        let (w, x, y) = (1.0 / r, r.ln(), f.ln());
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    let a = (sxx * sy - sx * sxy) / det;
    let b = (sw * sxy - sx * sy) / det;
    (-b, a.exp())
}

/// Same fit with the intercept pinned to `ln f_1`.
pub fn wlse2(freqs: &[f64]) -> (f64, f64) {
    let a = freqs[0].ln();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, f) in freqs.iter().enumerate() {
        let r = (i + 1) as f64;
        let (w, x, y) = (1.0 / r, r.ln(), f.ln());
        num += w * x * (y - a);
        den += w * x * x;
    }
    (-num / den, freqs[0])
}

/// Root of `g(t) = 0` on `[lo, hi]` by bisection, assuming a sign change.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Sub-sampled unigram probabilities recomputed from scratch.
pub fn subsampled_probs(counts: &[u64], total: u64, t: f64) -> Vec<f64> {
    let weights: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let f = c as f64 / total as f64;
            let keep = (f / t).sqrt() * t / f + t / f;
            c as f64 * if keep > 1.0 { 1.0 } else { keep }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

/// A vocabulary with `n` words and random counts in `1..=max`.
pub fn random_vocab<R: Rng>(rng: &mut R, n: usize, max: u64) -> Vocabulary {
    let counts: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max)).collect();
    Vocabulary::from_counts(&counts).unwrap()
}

pub fn random_vectors<R: Rng>(rng: &mut R, words: usize, dim: usize, scale: f32) -> Embeddings {
    let names = (0..words).map(|i| format!("w{i}")).collect();
    let data = (0..words * dim)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    Embeddings::new(names, dim, data).unwrap()
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    seeded_rng(seed, 12345)
}

pub fn cos(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// 3CosAdd by scanning every word; first maximum wins.
pub fn analogy(emb: &Embeddings, a: usize, b: usize, c: usize) -> usize {
    let target: Vec<f32> = (0..emb.dim())
        .map(|j| emb.row(b)[j] - emb.row(a)[j] + emb.row(c)[j])
        .collect();
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for w in 0..emb.len() {
        if w == a || w == b || w == c {
            continue;
        }
        let s = cos(&target, emb.row(w));
        if s > best.1 {
            best = (w, s);
        }
    }
    best.0
}

/// `sum_{w in S} weight_w exp(v'_w . v_c) / sum_{w in V} exp(v'_w . v_c)`
/// evaluated literally.
pub fn completion_score(
    context: &[usize],
    weights: &[f64],
    candidate: usize,
    input: &Embeddings,
    output: &Embeddings,
) -> f64 {
    let dot = |w: usize| -> f64 {
        output
            .row(w)
            .iter()
            .zip(input.row(candidate))
            .map(|(x, y)| *x as f64 * *y as f64)
            .sum()
    };
    let z: f64 = (0..output.len()).map(|w| dot(w).exp()).sum();
    context
        .iter()
        .zip(weights)
        .map(|(&w, &k)| k * dot(w).exp())
        .sum::<f64>()
        / z
}

/// Population Pearson correlation written out term by term.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

pub fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..xs.len() {
        if xs[i] > xs[best] {
            best = i;
        }
    }
    best
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Finite-difference checks of single training steps on a small model.
pub mod grad {
    use rand::Rng;
    use subnoise::EmbeddingMatrices;

    pub const V: usize = 20;
    pub const D: usize = 10;
    pub const H: f64 = 1e-4;

    pub fn ln_sigmoid(x: f64) -> f64 {
        -(1.0 + (-x).exp()).ln()
    }

    /// Log-likelihood of one example: the positive `output` scored with label 1,
    /// each noise word with label 0, after subtracting `shift(w)` from the score.
    pub fn objective(
        emb: &EmbeddingMatrices<f64>,
        inputs: &[usize],
        output: usize,
        noise: &[usize],
        shift: &dyn Fn(usize) -> f64,
    ) -> f64 {
        let mut h = [0.0; D];
        for &i in inputs {
            for (hj, x) in h.iter_mut().zip(emb.input_row(i)) {
                *hj += x / inputs.len() as f64;
            }
        }
        let score = |w: usize| -> f64 {
            emb.output_row(w).iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() - shift(w)
        };
        let mut j = ln_sigmoid(score(output));
        for &n in noise {
            j += ln_sigmoid(-score(n));
        }
        j
    }

    pub fn random_model(seed: u64) -> EmbeddingMatrices<f64> {
        let mut rng = super::rng(seed);
        let mut gen = |_| rng.random_range(-0.5..0.5);
        let input = (0..V * D).map(&mut gen).collect();
        let output = (0..V * D).map(&mut gen).collect();
        EmbeddingMatrices::from_parts(V, D, input, output)
    }

    /// Compares the step's parameter change, divided by the learning rate, with
    /// central differences of the objective. Returns the largest relative error
    /// over touched parameters and the number of them.
    pub fn check(
        emb: &EmbeddingMatrices<f64>,
        step: &dyn Fn(&mut EmbeddingMatrices<f64>, f64),
        objective: &dyn Fn(&EmbeddingMatrices<f64>) -> f64,
    ) -> (f64, usize) {
        let lr = 0.01;
        let mut after = emb.clone();
        step(&mut after, lr);
        let mut worst: f64 = 0.0;
        let mut touched = 0;
        for which in 0..2 {
            for p in 0..V * D {
                let get = |m: &EmbeddingMatrices<f64>| if which == 0 { m.input()[p] } else { m.output()[p] };
                let analytic = (get(&after) - get(emb)) / lr;
                let mut plus = emb.clone();
                let mut minus = emb.clone();
                if which == 0 {
                    plus.input_mut()[p] += H;
                    minus.input_mut()[p] -= H;
                } else {
                    plus.output_mut()[p] += H;
                    minus.output_mut()[p] -= H;
                }
                let numeric = (objective(&plus) - objective(&minus)) / (2.0 * H);
                if analytic == 0.0 {
                    assert!(numeric.abs() < 1e-9, "untouched parameter has gradient {numeric}");
                    continue;
                }
                touched += 1;
                worst = worst.max(super::rel_err(analytic, numeric));
            }
        }
        (worst, touched)
    }
}
