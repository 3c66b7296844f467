//! Deterministic random streams.
//!
//! Every sampled object is drawn from a ChaCha stream keyed by a base seed and
//! a task index, so parallel sweeps reproduce bit-for-bit regardless of
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A child seed for task `index`, for APIs that take a plain seed.
pub fn derive(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, index).next_u64()
}
