//! Seeded random streams.
//!
//! Every workflow derives its randomness from one `u64` seed. Independent
//! units of work (replications, bootstrap draws, folds) each get their own
//! ChaCha stream so that parallel and sequential execution agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream `index` of the generator keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream for a nested unit of work, e.g. replication `outer`, draw `inner`.
pub fn substream(seed: u64, outer: u64, inner: u64) -> StreamRng {
    // Distinct keys per outer index; streams within a key are independent.
    stream(seed ^ outer.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15), inner)
}
