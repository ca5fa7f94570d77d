//! Seed plumbing. Every random draw in the crate comes from a ChaCha8 stream
//! whose seed is derived from a user seed plus a path of stream identifiers,
//! so results do not depend on thread scheduling or call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a base seed with a sequence of stream identifiers.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &id| splitmix64(acc ^ splitmix64(id)))
}

pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}

/// FNV-1a over raw bytes; used where a seed must follow from a string.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

// Stream tags keep unrelated draws from sharing a sequence.
pub(crate) const TAG_PATTERNS: u64 = 1;
pub(crate) const TAG_NOISE: u64 = 2;
pub(crate) const TAG_SAMPLER: u64 = 3;
pub(crate) const TAG_SLOTS: u64 = 4;
pub(crate) const TAG_CONTENT: u64 = 5;
pub(crate) const TAG_LABEL: u64 = 6;
pub(crate) const TAG_SURROGATE: u64 = 7;
