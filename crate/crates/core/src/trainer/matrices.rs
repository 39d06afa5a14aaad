use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::marker::PhantomData;

use num_traits::{Float, FromPrimitive};
use rand::Rng;

use crate::seeded_rng;

/// Floating-point type for parameters. Training uses `f32`; `f64` is handy for
/// gradient checks.
pub trait Real: Float + FromPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn cast<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 is representable")
}

/// Input vectors `v_w` and output vectors `v'_w`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrices<F = f32> {
    vocab_size: usize,
    dim: usize,
    input: Vec<F>,
    output: Vec<F>,
}

impl<F: Real> EmbeddingMatrices<F> {
    /// Input entries uniform in `[-0.5/dim, 0.5/dim)`, output entries zero.
    pub fn init(vocab_size: usize, dim: usize, seed: u64) -> Self {
        assert!(vocab_size >= 1 && dim >= 1, "empty embedding matrix");
        let mut rng = seeded_rng(seed, u64::MAX);
        let half = 0.5 / dim as f64;
        let upper: F = cast(half);
        let input = (0..vocab_size * dim)
            .map(|_| loop {
                let x: F = cast((rng.random::<f64>() - 0.5) / dim as f64);
                // Narrowing casts can round onto the open upper bound.
                if x < upper {
                    break x;
                }
            })
            .collect();
        EmbeddingMatrices {
            vocab_size,
            dim,
            input,
            output: vec![F::zero(); vocab_size * dim],
        }
    }

    pub fn from_parts(vocab_size: usize, dim: usize, input: Vec<F>, output: Vec<F>) -> Self {
        assert_eq!(input.len(), vocab_size * dim);
        assert_eq!(output.len(), vocab_size * dim);
        EmbeddingMatrices {
            vocab_size,
            dim,
            input,
            output,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self) -> &[F] {
        &self.input
    }

    pub fn output(&self) -> &[F] {
        &self.output
    }

    pub fn input_mut(&mut self) -> &mut [F] {
        &mut self.input
    }

    pub fn output_mut(&mut self) -> &mut [F] {
        &mut self.output
    }

    pub fn input_row(&self, idx: usize) -> &[F] {
        &self.input[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn output_row(&self, idx: usize) -> &[F] {
        &self.output[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    pub(crate) fn shared(&mut self) -> SharedParams<'_, F> {
        SharedParams {
            input: self.input.as_mut_ptr(),
            output: self.output.as_mut_ptr(),
            rows: self.vocab_size,
            dim: self.dim,
            _borrow: PhantomData,
        }
    }
}

/// Unsynchronized view of the parameters shared by training workers.
///
/// Workers update rows without locking; concurrent writes to the same row
/// may interleave. Rows handed out must not outlive the step that requested
/// them.
pub(crate) struct SharedParams<'a, F> {
    input: *mut F,
    output: *mut F,
    rows: usize,
    dim: usize,
    _borrow: PhantomData<&'a mut [F]>,
}

unsafe impl<F: Send> Send for SharedParams<'_, F> {}
unsafe impl<F: Send> Sync for SharedParams<'_, F> {}

impl<F> SharedParams<'_, F> {
    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// # Safety
    /// `idx < rows`, and the caller must not hold another reference to the
    /// same row.
    #[allow(clippy::mut_from_ref)]
    #[inline]
    pub(crate) unsafe fn input_row(&self, idx: usize) -> &mut [F] {
        debug_assert!(idx < self.rows);
        std::slice::from_raw_parts_mut(self.input.add(idx * self.dim), self.dim)
    }

    /// # Safety
    /// Same contract as [`SharedParams::input_row`].
    #[allow(clippy::mut_from_ref)]
    #[inline]
    pub(crate) unsafe fn output_row(&self, idx: usize) -> &mut [F] {
        debug_assert!(idx < self.rows);
        std::slice::from_raw_parts_mut(self.output.add(idx * self.dim), self.dim)
    }
}

#[inline]
pub(crate) fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    let mut acc = [F::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] = acc[i] + x[i] * y[i];
        }
    }
    let mut sum = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        sum = sum + *x * *y;
    }
    sum
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy<F: Real>(a: F, x: &[F], y: &mut [F]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * *xi;
    }
}
