//! Seed handling.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! root seed. Independent consumers (DAG sampling, cause support, noise,
//! sampling of observed nodes, ...) select their own ChaCha stream id, mixed
//! from a purpose tag and any per-task counters such as the trial index. A
//! task's randomness thus depends only on `(seed, tags)`, never on the order
//! or the thread in which tasks run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod tag {
    pub const DAG: u64 = 1;
    pub const CAUSE_SUPPORT: u64 = 2;
    pub const CAUSE_MAGNITUDE: u64 = 3;
    pub const CAUSE_NOISE: u64 = 4;
    pub const SIGNAL_NOISE: u64 = 5;
    pub const SAMPLING: u64 = 6;
    pub const SIR: u64 = 7;
    pub const CONTACTS: u64 = 8;
    pub const TRIAL: u64 = 9;
    pub const ALGEBRA_CHECK: u64 = 10;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a list of tags into one stream id.
pub fn mix(tags: &[u64]) -> u64 {
    tags.iter().fold(0x5eed_u64, |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Generator for the stream selected by `tags` under `seed`.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mix(tags));
    rng
}

/// A derived 64-bit seed, for handing to a nested consumer.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    splitmix64(seed ^ mix(tags))
}
