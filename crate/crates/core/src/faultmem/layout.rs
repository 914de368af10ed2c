use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which MSBs of each weight word sit in 8T cells.
///
/// Text form: `all6t`, `hybrid:<k>`, `banks:<k0>,<k1>,...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LayoutScheme {
    AllSixT,
    /// The same `k` protected MSBs in every bank.
    HybridUniform {
        k: usize,
    },
    /// One protected-MSB count per weight bank.
    SensitivityBanks {
        k_per_bank: Vec<usize>,
    },
}

impl fmt::Display for LayoutScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AllSixT => write!(f, "all6t"),
            Self::HybridUniform { k } => write!(f, "hybrid:{k}"),
            Self::SensitivityBanks { k_per_bank } => {
                let ks: Vec<String> = k_per_bank.iter().map(|k| k.to_string()).collect();
                write!(f, "banks:{}", ks.join(","))
            }
        }
    }
}

impl FromStr for LayoutScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidLayout(format!("cannot parse layout {s:?}"));
        if s.eq_ignore_ascii_case("all6t") {
            return Ok(Self::AllSixT);
        }
        if let Some(k) = s.strip_prefix("hybrid:") {
            return Ok(Self::HybridUniform {
                k: k.trim().parse().map_err(|_| bad())?,
            });
        }
        if let Some(ks) = s.strip_prefix("banks:") {
            let k_per_bank = ks
                .split(',')
                .map(|k| k.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<usize>>>()?;
            return Ok(Self::SensitivityBanks { k_per_bank });
        }
        Err(bad())
    }
}

impl TryFrom<String> for LayoutScheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LayoutScheme> for String {
    fn from(l: LayoutScheme) -> Self {
        l.to_string()
    }
}

/// A layout scheme bound to a word width.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemoryLayout {
    scheme: LayoutScheme,
    word_bits: usize,
}

impl MemoryLayout {
    pub fn new(scheme: LayoutScheme, word_bits: usize) -> Result<Self> {
        if !(1..=16).contains(&word_bits) {
            return Err(Error::InvalidLayout(format!(
                "word_bits {word_bits} outside 1..=16"
            )));
        }
        let too_many = |k: usize| {
            Error::InvalidLayout(format!("{k} protected bits exceed word width {word_bits}"))
        };
        match &scheme {
            LayoutScheme::AllSixT => {}
            LayoutScheme::HybridUniform { k } => {
                if *k > word_bits {
                    return Err(too_many(*k));
                }
            }
            LayoutScheme::SensitivityBanks { k_per_bank } => {
                if k_per_bank.is_empty() {
                    return Err(Error::InvalidLayout("empty per-bank list".into()));
                }
                if let Some(&k) = k_per_bank.iter().find(|&&k| k > word_bits) {
                    return Err(too_many(k));
                }
            }
        }
        Ok(Self { scheme, word_bits })
    }

    pub fn all_six_t(word_bits: usize) -> Result<Self> {
        Self::new(LayoutScheme::AllSixT, word_bits)
    }

    pub fn hybrid(k: usize, word_bits: usize) -> Result<Self> {
        Self::new(LayoutScheme::HybridUniform { k }, word_bits)
    }

    pub fn banks(k_per_bank: Vec<usize>, word_bits: usize) -> Result<Self> {
        Self::new(LayoutScheme::SensitivityBanks { k_per_bank }, word_bits)
    }

    pub fn scheme(&self) -> &LayoutScheme {
        &self.scheme
    }

    pub fn word_bits(&self) -> usize {
        self.word_bits
    }

    /// Protected-MSB count of `bank`. Out-of-range banks of a per-bank layout are an error.
    pub fn k_for_bank(&self, bank: usize) -> Result<usize> {
        match &self.scheme {
            LayoutScheme::AllSixT => Ok(0),
            LayoutScheme::HybridUniform { k } => Ok(*k),
            LayoutScheme::SensitivityBanks { k_per_bank } => {
                k_per_bank.get(bank).copied().ok_or_else(|| {
                    Error::InvalidLayout(format!(
                        "bank {bank} out of range for {} per-bank entries",
                        k_per_bank.len()
                    ))
                })
            }
        }
    }

    /// Per-bank protected counts for a network with `bank_count` banks.
    ///
    /// Equivalent layouts (`all6t`, `hybrid:0`, `banks:0,..,0`) resolve identically.
    pub fn resolve(&self, bank_count: usize) -> Result<Vec<usize>> {
        if let LayoutScheme::SensitivityBanks { k_per_bank } = &self.scheme {
            if k_per_bank.len() != bank_count {
                return Err(Error::InvalidLayout(format!(
                    "{} per-bank entries for {bank_count} banks",
                    k_per_bank.len()
                )));
            }
        }
        (0..bank_count).map(|b| self.k_for_bank(b)).collect()
    }

    /// Bit mask of the 8T positions in a word of `bank`.
    pub fn protected_mask(&self, bank: usize) -> Result<u16> {
        Ok(msb_mask(self.k_for_bank(bank)?, self.word_bits))
    }
}

impl fmt::Display for MemoryLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.scheme.fmt(f)
    }
}

/// Mask of the top `k` bits of a `word_bits`-wide word.
pub(crate) fn msb_mask(k: usize, word_bits: usize) -> u16 {
    let word = ((1u32 << word_bits) - 1) as u16;
    let low = ((1u32 << (word_bits - k)) - 1) as u16;
    word & !low
}

/// Bit positions of `bank` stored in 8T cells, most significant first.
pub fn protected_positions(layout: &MemoryLayout, bank: usize) -> Result<Vec<usize>> {
    let k = layout.k_for_bank(bank)?;
    let w = layout.word_bits();
    Ok((w - k..w).rev().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protected_positions_by_scheme() {
        let h3 = MemoryLayout::hybrid(3, 8).unwrap();
        assert_eq!(protected_positions(&h3, 0).unwrap(), vec![7, 6, 5]);
        assert_eq!(h3.protected_mask(4).unwrap(), 0xE0);

        let all6 = MemoryLayout::all_six_t(8).unwrap();
        assert!(protected_positions(&all6, 2).unwrap().is_empty());
        assert_eq!(all6.protected_mask(0).unwrap(), 0);

        let banks = MemoryLayout::banks(vec![2, 4, 2, 2, 3], 8).unwrap();
        assert_eq!(protected_positions(&banks, 1).unwrap(), vec![7, 6, 5, 4]);
        assert!(protected_positions(&banks, 5).is_err());

        let h8 = MemoryLayout::hybrid(8, 8).unwrap();
        assert_eq!(h8.protected_mask(0).unwrap(), 0xFF);
    }

    #[test]
    fn invalid_layouts_rejected() {
        assert!(MemoryLayout::hybrid(9, 8).is_err());
        assert!(MemoryLayout::banks(vec![], 8).is_err());
        assert!(MemoryLayout::banks(vec![1, 9], 8).is_err());
        let b = MemoryLayout::banks(vec![1, 2], 8).unwrap();
        assert!(b.resolve(3).is_err());
        assert_eq!(b.resolve(2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn text_form_round_trips() {
        for s in ["all6t", "hybrid:3", "banks:2,4,2,2,3"] {
            let l: LayoutScheme = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        assert!("hybrid:x".parse::<LayoutScheme>().is_err());
        assert!("mixed".parse::<LayoutScheme>().is_err());
        let json = serde_json::to_string(&LayoutScheme::HybridUniform { k: 2 }).unwrap();
        assert_eq!(json, "\"hybrid:2\"");
    }

    #[test]
    fn equivalent_layouts_resolve_identically() {
        let a = MemoryLayout::all_six_t(8).unwrap().resolve(5).unwrap();
        let h0 = MemoryLayout::hybrid(0, 8).unwrap().resolve(5).unwrap();
        let b0 = MemoryLayout::banks(vec![0; 5], 8)
            .unwrap()
            .resolve(5)
            .unwrap();
        assert_eq!(a, h0);
        assert_eq!(a, b0);
    }

    #[test]
    fn msb_masks() {
        assert_eq!(msb_mask(0, 8), 0);
        assert_eq!(msb_mask(1, 8), 0x80);
        assert_eq!(msb_mask(3, 8), 0xE0);
        assert_eq!(msb_mask(16, 16), 0xFFFF);
        assert_eq!(msb_mask(2, 4), 0b1100);
    }
}
