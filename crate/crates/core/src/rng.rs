//! Seeded per-sample random streams.
//!
//! Sample `i` of a run with seed `s` always uses ChaCha8 stream `i` of key
//! `s`, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream reserved for draws that belong to the run rather than a sample.
pub const RUN_STREAM: u64 = u64::MAX;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn run_rng(seed: u64) -> ChaCha8Rng {
    sample_rng(seed, RUN_STREAM)
}
