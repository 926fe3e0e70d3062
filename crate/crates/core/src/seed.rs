//! Stable seed derivation.
//!
//! Generators never share an RNG across items: each item gets its own stream
//! derived from the global seed and the item's identity, so splitting work
//! across threads cannot change the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a per-item seed from a global seed and any number of key parts.
pub fn derive_seed(global: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Portable RNG for a seed. ChaCha output is fixed across platforms and
/// crate versions, unlike `StdRng`.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng(derive_seed(global, parts))`.
pub fn rng_for(global: u64, parts: &[&str]) -> ChaCha8Rng {
    rng(derive_seed(global, parts))
}
