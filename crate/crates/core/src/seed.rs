//! Random stream derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose 256-bit
//! key is `SHA-256(parent_seed_le || tag || 0x00 || index_le)`. Streams are
//! therefore addressed by name rather than by call order, so results do not
//! depend on thread scheduling or on how many draws another component made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

fn digest(parent: u64, tag: &str, index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(parent.to_le_bytes());
    hasher.update(tag.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    hasher.finalize().into()
}

/// Derive a child 64-bit seed from a parent seed, a purpose tag and an index.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    let d = digest(parent, tag, index);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Derive a seed from a path of tags, e.g. sweep coordinates.
pub fn derive_path(parent: u64, path: &[(&str, u64)]) -> u64 {
    path.iter().fold(parent, |acc, (tag, idx)| derive_seed(acc, tag, *idx))
}

/// Generator for the stream `(parent, tag, index)`.
pub fn stream(parent: u64, tag: &str, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(digest(parent, tag, index))
}
