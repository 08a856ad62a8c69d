//! Seed derivation.
//!
//! Every random decision in the crate draws from a ChaCha8 stream keyed by
//! `(seed, role, index)`. Streams for different roles or indices are
//! independent, so work can be split across threads without changing output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed for `role` and `index` from a parent seed.
///
/// Stable across platforms and releases: only FNV-1a and SplitMix64 are used.
pub fn derive_seed(seed: u64, role: &str, index: u64) -> u64 {
    let mut h = splitmix64(seed ^ fnv1a(role.as_bytes()));
    h = splitmix64(h ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93));
    h
}

/// RNG for the substream `(seed, role, index)`.
pub fn stream(seed: u64, role: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, role, index))
}
