//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha stream whose seed is derived
//! from the scenario seed plus a tuple of integer tags (AO iteration, slot,
//! particle, ...). Results therefore do not depend on how work is scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `seed`, giving a well-mixed child seed.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, tags: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

/// Tags that keep the independent consumers of one seed apart.
pub mod tags {
    pub const TARGETS: u64 = 0x7461_7267;
    pub const PSO: u64 = 0x7073_6f00;
    pub const PSO_INIT: u64 = 0x7073_6f69;
}
