use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chip::ChipInstance;
use crate::error::{Error, Result};
use crate::quantnet::{FixedPointFormat, QuantizedNetwork, WeightStore};

/// How read-access faults behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    /// A read-faulty cell always returns the complement of its content.
    #[default]
    #[serde(alias = "static_mask")]
    Static,
    /// Every read of every non-write-faulty 6T bit flips independently with
    /// the read-access probability; the chip's read mask is not used.
    #[serde(alias = "per_access_bernoulli")]
    Bernoulli,
}

impl std::str::FromStr for AccessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Self::Static),
            "bernoulli" => Ok(Self::Bernoulli),
            _ => Err(Error::InvalidLayout(format!("unknown access mode {s:?}"))),
        }
    }
}

#[derive(Debug)]
struct StoredBank {
    rows: usize,
    cols: usize,
    stored: Vec<u16>,
    read_mask: Vec<u16>,
    /// Bits eligible for per-access flips.
    flippable: Vec<u16>,
}

/// Weights as held by one faulty chip after loading.
#[derive(Debug)]
pub struct ChipStore {
    format: FixedPointFormat,
    mode: AccessMode,
    p_read: f64,
    seed: u64,
    banks: Vec<StoredBank>,
    /// Bank fetches served so far; keys the per-access random stream.
    accesses: AtomicU64,
}

/// Loads `q` into `chip`.
///
/// Healthy and read-faulty cells take the intended bit. A write-faulty cell
/// keeps a uniformly random power-up value. A read-disturb-faulty cell flips
/// its content on its first read, so it holds the complement for every
/// later use.
pub fn write_weights(
    chip: &ChipInstance,
    q: &QuantizedNetwork,
    seed: u64,
    mode: AccessMode,
) -> Result<ChipStore> {
    if chip.word_bits != q.format.word_bits() {
        return Err(Error::DimensionMismatch {
            expected: q.format.word_bits(),
            actual: chip.word_bits,
            context: "chip word width",
        });
    }
    if chip.banks.len() != q.banks.len() {
        return Err(Error::DimensionMismatch {
            expected: q.banks.len(),
            actual: chip.banks.len(),
            context: "chip bank count",
        });
    }
    let word = q.format.word_mask();
    let mut banks = Vec::with_capacity(q.banks.len());
    for (b, (faults, qb)) in chip.banks.iter().zip(&q.banks).enumerate() {
        if (faults.rows, faults.cols) != qb.shape() {
            return Err(Error::DimensionMismatch {
                expected: qb.rows * qb.cols,
                actual: faults.words(),
                context: "chip bank shape",
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let stored = qb
            .codes
            .iter()
            .zip(&faults.write)
            .zip(&faults.disturb)
            .map(|((&c, &wm), &dm)| {
                let intended = q.format.encode(c as i32);
                let mut v = intended;
                if wm != 0 {
                    let power_up: u16 = rng.random();
                    v = (intended & !wm) | (power_up & wm);
                }
                v ^ dm
            })
            .collect();
        let flippable = faults
            .write
            .iter()
            .zip(&faults.disturb)
            .map(|(&wm, &dm)| word & !faults.protected & !wm & !dm)
            .collect();
        banks.push(StoredBank {
            rows: qb.rows,
            cols: qb.cols,
            stored,
            read_mask: faults.read.clone(),
            flippable,
        });
    }
    Ok(ChipStore {
        format: q.format,
        mode,
        p_read: chip.probs.read_access,
        seed,
        banks,
        accesses: AtomicU64::new(0),
    })
}

impl ChipStore {
    pub fn mode(&self) -> AccessMode {
        self.mode
    }

    pub fn format(&self) -> FixedPointFormat {
        self.format
    }

    /// Contents of the cells, before any read fault.
    pub fn stored(&self, bank: usize, row: usize, col: usize) -> u16 {
        let b = &self.banks[bank];
        b.stored[row * b.cols + col]
    }

    fn next_stream(&self) -> ChaCha8Rng {
        let n = self.accesses.fetch_add(1, Ordering::Relaxed);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5EED_ACCE_55ED_0001);
        rng.set_stream(n);
        rng
    }
}

impl WeightStore for ChipStore {
    fn read(&self, bank: usize, row: usize, col: usize) -> u16 {
        let b = &self.banks[bank];
        let i = row * b.cols + col;
        match self.mode {
            AccessMode::Static => b.stored[i] ^ b.read_mask[i],
            AccessMode::Bernoulli => {
                let mut rng = self.next_stream();
                let mut flips = 0u16;
                for bit in 0..self.format.word_bits() {
                    if rng.random::<f64>() < self.p_read {
                        flips |= 1 << bit;
                    }
                }
                b.stored[i] ^ (flips & b.flippable[i])
            }
        }
    }

    fn read_bank(&self, bank: usize, shape: (usize, usize), out: &mut [u16]) {
        let b = &self.banks[bank];
        debug_assert_eq!(shape, (b.rows, b.cols));
        match self.mode {
            AccessMode::Static => {
                for ((o, &s), &m) in out.iter_mut().zip(&b.stored).zip(&b.read_mask) {
                    *o = s ^ m;
                }
            }
            AccessMode::Bernoulli => {
                out.copy_from_slice(&b.stored);
                if self.p_read <= 0.0 {
                    return;
                }
                // Geometric gaps between flipped bits over the bank's bit sequence.
                let wb = self.format.word_bits();
                let total = out.len() * wb;
                let log_q = (1.0 - self.p_read).ln();
                let mut rng = self.next_stream();
                let mut pos = 0usize;
                loop {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let gap = (u.ln() / log_q).floor();
                    if gap.is_nan() || gap >= (total - pos) as f64 {
                        break;
                    }
                    pos += gap as usize;
                    let (w, bit) = (pos / wb, pos % wb);
                    out[w] ^= (1u16 << bit) & b.flippable[w];
                    pos += 1;
                    if pos >= total {
                        break;
                    }
                }
            }
        }
    }

    fn per_access(&self) -> bool {
        self.mode == AccessMode::Bernoulli
    }
}
