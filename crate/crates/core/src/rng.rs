//! Deterministic random batteries.
//!
//! All randomness goes through [`LabRng`], Marsaglia's xorshift128 generator
//! as implemented by `rand_xorshift`. The state is four 32-bit words
//! `(x, y, z, w)` and one step is
//!
//! ```text
//! t = x ^ (x << 11)
//! (x, y, z) = (y, z, w)
//! w = w ^ (w >> 19) ^ t ^ (t >> 8)
//! ```
//!
//! The state is seeded with `SeedableRng::seed_from_u64`, so fixing the seed
//! fixes every battery.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_xorshift::XorShiftRng;

/// Seeded generator used for every random test battery.
#[derive(Debug, Clone)]
pub struct LabRng(XorShiftRng);

impl LabRng {
    pub fn new(seed: u64) -> Self {
        Self(XorShiftRng::seed_from_u64(seed))
    }

    /// Uniform sample in `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        self.0.random::<f64>() * 2.0 - 1.0
    }

    /// Uniform sample in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    /// Vector with entries uniform in `[-1, 1)`.
    pub fn vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.symmetric())
    }
}
