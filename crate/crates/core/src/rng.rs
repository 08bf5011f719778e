//! Seeded random streams with draw accounting.
//!
//! Every run owns a single [`SimRng`]. The key is derived from the 64-bit
//! master seed with `ChaCha8Rng::seed_from_u64`, and independent sub-streams
//! (Monte Carlo trials) select ChaCha stream number `trial`. Two streams with
//! the same key never overlap, so trial `i` of seed `s` is always the same
//! sequence regardless of how many other trials ran or in which order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
    draws: u64,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Sub-stream `stream` of the master `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner, draws: 0 }
    }

    /// Number of primitive draws (`next_u32`, `next_u64`, `fill_bytes`) taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(dst)
    }
}
