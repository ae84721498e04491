//! Seeded randomness.
//!
//! The generator is ChaCha8 (`rand_chacha`), seeded from a `u64` through
//! `SeedableRng::seed_from_u64`; Gaussian draws use `rand_distr::Normal`.
//! Both are platform-independent, so a seed reproduces bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Tensor;
use crate::{Error, Real, Result};

/// Standard deviation of the initial parameter draw.
pub const INIT_STD: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent generator for sub-task `stream` (e.g. one epoch's
    /// shuffle), derived only from the master seed.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        Normal::new(mean, std)
            .expect("finite positive std")
            .sample(&mut self.rng)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }
}

/// Tensor of i.i.d. `N(0, INIT_STD^2)` draws, marked as requiring grads.
pub fn gaussian_init<T: Real>(shape: &[usize], rng: &mut RngState) -> Result<Tensor<T>> {
    if shape.contains(&0) {
        return Err(Error::Shape(format!("zero extent in shape {shape:?}")));
    }
    let n: usize = shape.iter().product();
    let dist = Normal::new(0.0, INIT_STD).expect("valid std");
    let values = (0..n)
        .map(|_| T::from_f64_lossy(dist.sample(rng.generator())))
        .collect();
    Ok(Tensor::new(shape.to_vec(), values)?.with_grad())
}
