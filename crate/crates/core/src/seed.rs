//! Seed fan-out.
//!
//! One master seed drives every random choice in a run. Each consumer draws
//! from its own stream, derived as the first 8 bytes (little-endian) of
//! `SHA-256(master_le_bytes || "/" || component)`. Components can therefore be
//! reproduced in isolation, and adding a new consumer never perturbs the
//! existing streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive_seed(master: u64, component: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(b"/");
    hasher.update(component.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_rng(master: u64, component: &str) -> Rng {
    rng_from(derive_seed(master, component))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, "init"), derive_seed(7, "init"));
        assert_ne!(derive_seed(7, "init"), derive_seed(7, "explore"));
        assert_ne!(derive_seed(7, "init"), derive_seed(8, "init"));
    }
}
