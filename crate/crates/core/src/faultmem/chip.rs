use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::curve::{BitcellKind, FailureModel, FailureType};
use super::layout::{msb_mask, MemoryLayout};
use crate::error::{Error, Result};

/// Per-bit 6T failure probabilities at one voltage, after renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultProbs {
    pub read_access: f64,
    pub write: f64,
    pub read_disturb: f64,
}

impl FaultProbs {
    pub fn at(model: &FailureModel, volts: f64) -> Self {
        let p = |t| model.failure_prob(BitcellKind::SixT, t, volts);
        let mut probs = Self {
            read_access: p(FailureType::ReadAccess),
            write: p(FailureType::Write),
            read_disturb: p(FailureType::ReadDisturb),
        };
        let sum = probs.total();
        if sum > 1.0 {
            log::warn!("failure probabilities at {volts} V sum to {sum:.4}; renormalizing to 1");
            probs.read_access /= sum;
            probs.write /= sum;
            probs.read_disturb /= sum;
        }
        probs
    }

    pub fn total(&self) -> f64 {
        self.read_access + self.write + self.read_disturb
    }
}

/// Fault masks of one weight bank, one `u16` per word, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BankFaults {
    pub rows: usize,
    pub cols: usize,
    /// 8T positions of every word in this bank.
    pub protected: u16,
    pub read: Vec<u16>,
    pub write: Vec<u16>,
    pub disturb: Vec<u16>,
}

impl BankFaults {
    pub fn words(&self) -> usize {
        self.rows * self.cols
    }
}

/// One Monte Carlo chip: which 6T cells fail, and how, at a given voltage.
///
/// Each bit carries at most one failure type.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipInstance {
    pub voltage: f64,
    pub seed: u64,
    pub word_bits: usize,
    pub probs: FaultProbs,
    pub banks: Vec<BankFaults>,
}

impl ChipInstance {
    pub fn bank_shapes(&self) -> Vec<(usize, usize)> {
        self.banks.iter().map(|b| (b.rows, b.cols)).collect()
    }

    fn popcount(&self, f: impl Fn(&BankFaults) -> &Vec<u16>) -> u64 {
        self.banks
            .iter()
            .flat_map(|b| f(b).iter())
            .map(|m| m.count_ones() as u64)
            .sum()
    }

    pub fn read_fault_count(&self) -> u64 {
        self.popcount(|b| &b.read)
    }

    pub fn write_fault_count(&self) -> u64 {
        self.popcount(|b| &b.write)
    }

    pub fn disturb_fault_count(&self) -> u64 {
        self.popcount(|b| &b.disturb)
    }

    /// Number of 6T bits, i.e. bits that could fail.
    pub fn six_t_bits(&self) -> u64 {
        let word = ((1u32 << self.word_bits) - 1) as u16;
        self.banks
            .iter()
            .map(|b| (word & !b.protected).count_ones() as u64 * b.words() as u64)
            .sum()
    }
}

/// Draws a chip. Every 6T bit takes one categorical sample: read-access fault,
/// write fault, read-disturb fault or healthy. Bank `b` uses ChaCha stream `b`
/// of `seed`, and one uniform is drawn for every bit position (8T included), so
/// for a fixed seed the faults of a layout with more protected bits are a
/// subset of those with fewer.
pub fn sample_chip(
    layout: &MemoryLayout,
    model: &FailureModel,
    volts: f64,
    bank_shapes: &[(usize, usize)],
    seed: u64,
) -> Result<ChipInstance> {
    let ks = layout.resolve(bank_shapes.len())?;
    let word_bits = layout.word_bits();
    if !volts.is_finite() || volts <= 0.0 {
        return Err(Error::InvalidCurve(format!(
            "voltage must be positive, got {volts}"
        )));
    }
    let probs = FaultProbs::at(model, volts);
    let t_read = probs.read_access;
    let t_write = t_read + probs.write;
    let t_disturb = t_write + probs.read_disturb;

    let banks = bank_shapes
        .iter()
        .zip(&ks)
        .enumerate()
        .map(|(b, (&(rows, cols), &k))| {
            let protected = msb_mask(k, word_bits);
            let words = rows * cols;
            let mut read = vec![0u16; words];
            let mut write = vec![0u16; words];
            let mut disturb = vec![0u16; words];
            if t_disturb > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                for w in 0..words {
                    for bit in 0..word_bits {
                        let u: f64 = rng.random();
                        let m = 1u16 << bit;
                        if protected & m != 0 || u >= t_disturb {
                            continue;
                        }
                        if u < t_read {
                            read[w] |= m;
                        } else if u < t_write {
                            write[w] |= m;
                        } else {
                            disturb[w] |= m;
                        }
                    }
                }
            }
            BankFaults {
                rows,
                cols,
                protected,
                read,
                write,
                disturb,
            }
        })
        .collect();

    Ok(ChipInstance {
        voltage: volts,
        seed,
        word_bits,
        probs,
        banks,
    })
}
