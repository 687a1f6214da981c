//! Counter-based deterministic RNG streams: any (seed, index) pair yields an
//! independent generator, so mask i or sample i is reproducible on its own
//! and the surrounding loop can run in any order or in parallel.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
