//! Counter-based seed derivation. Every random stream in a run is a hash of
//! the master seed and the coordinates of the thing it drives, so results do
//! not depend on evaluation order or thread count.

use sha2::{Digest, Sha256};

fn hash_words(tag: &str, words: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    for w in words {
        h.update(w.to_le_bytes());
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().unwrap())
}

/// Digest of the resolved per-bank protected-bit counts and word width.
///
/// Layouts that protect the same bits share a digest.
pub fn layout_digest(k_per_bank: &[usize], word_bits: usize) -> u64 {
    let mut words = vec![word_bits as u64];
    words.extend(k_per_bank.iter().map(|&k| k as u64));
    hash_words("layout", &words)
}

/// Seed of one (voltage, layout) point.
pub fn point_seed(master: u64, volts: f64, layout_digest: u64) -> u64 {
    hash_words("point", &[master, volts.to_bits(), layout_digest])
}

/// Seed of chip `index` within a point; drives fault sampling.
pub fn chip_seed(point_seed: u64, index: u64) -> u64 {
    hash_words("chip", &[point_seed, index])
}

/// Seed for the power-up values and per-access stream of a loaded chip.
pub fn write_seed(chip_seed: u64) -> u64 {
    hash_words("write", &[chip_seed])
}
