//! Seeding conventions. Every random quantity is a pure function of a 64-bit
//! seed; ensemble trial `i` of a run seeded with `s` uses `s ^ i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SbmRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SbmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

/// Seed for the independent Gaussian component of a Dyson flow draw.
#[inline]
pub fn gauss_seed(seed: u64) -> u64 {
    seed.rotate_left(29) ^ 0x9e37_79b9_7f4a_7c15
}
