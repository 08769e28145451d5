//! Seeded random streams.
//!
//! Every chain and data generator owns a ChaCha20 stream seeded from a
//! 64-bit integer, so identical seeds reproduce identical draws across
//! platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type ChainRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> ChainRng {
    ChaCha20Rng::seed_from_u64(seed)
}
