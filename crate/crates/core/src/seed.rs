//! Seed derivation. Every random draw in the crate goes through a
//! `ChaCha8Rng` seeded from one of these helpers, so results only depend on
//! the user-supplied seed and never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// splitmix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a base seed with a sequence of 64-bit words.
pub fn derive(base: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix(base), |acc, w| mix(acc ^ mix(*w)))
}

/// Stable 64-bit digest of a string (first eight bytes of SHA-256).
pub fn digest_str(s: &str) -> u64 {
    let hash = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(hash[..8].try_into().expect("sha256 yields 32 bytes"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
