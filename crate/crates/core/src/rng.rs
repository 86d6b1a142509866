//! Reproducible random streams.
//!
//! Every trial gets its own ChaCha8 stream, keyed by the run seed and selected
//! by the trial index through the cipher's 64-bit stream id. A trial therefore
//! sees the same numbers no matter which thread executes it or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Factory for per-index random streams derived from one seed.
#[derive(Clone, Debug)]
pub struct StreamFamily {
    base: ChaCha8Rng,
}

impl StreamFamily {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream number `index`.
    pub fn stream(&self, index: u64) -> StreamRng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}

/// SplitMix64 finalizer; a bijective 64-bit mix.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for sub-run `index` of a run seeded with `seed` (sweep points, CHSH legs).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ mix64(index)
}

/// Uniform variate on `[0, 1)` with 53 random bits.
pub fn unit_f64<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
