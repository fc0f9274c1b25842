//! Named-stream seed splitting.
//!
//! Every random consumer derives its seed from the top-level seed and a
//! slash-separated stream name, e.g. `forecast/fr/wd-lstm/approx`. The derived
//! seed is the first 8 bytes (little-endian) of `SHA-256(seed_le || name)`, so
//! adding a stream never shifts the values drawn by another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn stream_seed(seed: u64, name: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream_rng(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, name))
}
