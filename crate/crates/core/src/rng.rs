//! Seeded randomness.
//!
//! Every random choice in the crate is drawn from a [`ChaCha8Rng`] seeded from
//! an explicit `u64`. Independent consumers derive named substreams so that
//! parallel or reordered work still sees the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the substream `tag` of the master `seed`.
pub fn substream(seed: u64, tag: &str) -> StreamRng {
    seeded(derive_seed(seed, tag))
}

/// Mixes a textual tag into a seed. Stable across platforms and releases.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(tag.as_bytes()))
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
