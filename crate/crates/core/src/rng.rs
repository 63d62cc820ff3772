//! The deterministic random source used by every stochastic stage.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), a counter-based
//! stream cipher keyed by the 64-bit seed through `seed_from_u64`. Uniform
//! doubles are built from the top 53 bits of `next_u64`, so a given seed
//! yields the same sequence on every platform. Changing either the generator
//! or the float construction changes every seeded output file.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seed offsets separating the random streams of different stages.
pub mod stage {
    pub const VOLUME_SAMPLING: u64 = 0;
    pub const SURFACE_SAMPLING: u64 = 0x5eed_0001;
    pub const MESH_NOISE: u64 = 0x5eed_0002;
}

#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Seed shifted by a stage offset.
    pub fn for_stage(seed: u64, offset: u64) -> Self {
        Self::new(seed.wrapping_add(offset))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal deviate (Box-Muller, one value per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
