//! Seeded randomness.
//!
//! Every random stream is a xoshiro256++ generator whose 256-bit state is
//! filled by SplitMix64 from a 64-bit seed. Per-item streams use the seed
//! `seed ^ (index * 0x9E3779B97F4A7C15)` (wrapping), so items can be
//! processed in any order or in parallel and still draw the same numbers.

use rand::{RngCore, SeedableRng};
pub use rand_xoshiro::Xoshiro256PlusPlus as Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn stream_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_mul(GOLDEN_GAMMA)
}

pub fn stream(seed: u64, index: u64) -> Rng {
    seeded(stream_seed(seed, index))
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one 64-bit output.
pub fn uniform(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
