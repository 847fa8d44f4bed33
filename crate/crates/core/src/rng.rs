//! Counter-based noise streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! master seed and positioned on an explicit stream id, so replica `i` of a
//! campaign always sees the same noise regardless of which worker runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream carrying the first field of replica `replicate`.
pub fn first_stream(replicate: u64) -> u64 {
    2 * replicate
}

/// Stream carrying the second (independent) field of replica `replicate`.
pub fn second_stream(replicate: u64) -> u64 {
    2 * replicate + 1
}
