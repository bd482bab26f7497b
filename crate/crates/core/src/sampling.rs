//! Deterministic, splittable random draws.
//!
//! Every draw is produced by a ChaCha20 generator (`rand_chacha::ChaCha20Rng`)
//! whose 256-bit key is `SHA-256("dp-bounds/v1" || seed || dataset bytes)` and
//! whose stream number is the draw index. The dataset bytes are the mode tag
//! (one byte, 0 for vectors and 1 for multisets), the record count as a
//! little-endian `u64`, then each record index as a little-endian `u32`.
//!
//! Because draw `k` depends only on `(seed, dataset, k)`, any partition of the
//! draw indices into shards reproduces the same values bit for bit.

use rand::distr::{Distribution, Open01};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::universe::{Dataset, DatasetMode};

const DOMAIN: &[u8] = b"dp-bounds/v1";

/// Key for `(seed, dataset)`.
pub fn stream_key(seed: u64, x: Option<&Dataset>) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(seed.to_le_bytes());
    if let Some(x) = x {
        h.update([match x.mode() {
            DatasetMode::Vector => 0u8,
            DatasetMode::Multiset => 1u8,
        }]);
        h.update((x.len() as u64).to_le_bytes());
        for r in x.values() {
            h.update(r.to_le_bytes());
        }
    }
    h.finalize().into()
}

/// Generator for draw number `draw` keyed by `(seed, dataset)`.
pub fn draw_rng(seed: u64, x: Option<&Dataset>, draw: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::from_seed(stream_key(seed, x));
    rng.set_stream(draw);
    rng
}

/// A uniform value in the open interval (0, 1) for the given draw.
pub fn uniform(seed: u64, x: Option<&Dataset>, draw: u64) -> f64 {
    Open01.sample(&mut draw_rng(seed, x, draw))
}

/// A fresh 64-bit seed derived from `(seed, draw)`, for handing to a
/// sub-computation.
pub fn derive_seed(seed: u64, draw: u64) -> u64 {
    draw_rng(seed, None, draw).next_u64()
}
