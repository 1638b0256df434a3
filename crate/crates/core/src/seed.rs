//! Per-instance RNG streams derived from a master seed.
//!
//! Streams are keyed by content (node, prompt id, purpose), never by
//! scheduling order, so parallel generation stays reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::graph::NodeId;

pub fn derive_seed(master: u64, node: NodeId, prompt_id: u16, stream: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((node as u64).to_le_bytes());
    h.update(prompt_id.to_le_bytes());
    h.update((stream.len() as u64).to_le_bytes());
    h.update(stream.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn rng_for(master: u64, node: NodeId, prompt_id: u16, stream: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, node, prompt_id, stream, index))
}
