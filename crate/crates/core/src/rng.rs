//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream. ChaCha
//! is counter based: a 64-bit seed selects the key and a 64-bit stream id
//! selects an independent keystream. Parallel work derives its generator from
//! `(seed, task_index)` via [`stream`], so results do not depend on the thread
//! schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// The generator for a given seed, stream 0.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream for task `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
