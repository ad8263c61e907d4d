//! Named sub-seeds, so each random stage (split, init, shuffle, ...) can be
//! reproduced on its own from the single run seed.

use sha2::{Digest, Sha256};

pub fn sub_seed(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
