//! Seeded random streams.
//!
//! Every consumer draws from its own named sub-stream of the run seed so that
//! modules stay reproducible in isolation and parallel work is independent of
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generator for sub-stream `(name, index)` of `seed`.
pub fn stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let key = splitmix(splitmix(seed ^ name_hash(name)) ^ splitmix(index.wrapping_add(1)));
    ChaCha8Rng::seed_from_u64(key)
}
