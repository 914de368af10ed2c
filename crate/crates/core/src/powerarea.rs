//! Closed-form bitcell power and area accounting for memory layouts.
//!
//! Dynamic (read/write) power per access scales as `(V / vnom)^dynamic_exponent`;
//! leakage per unit time as `(V / vnom) * exp((V - vnom) / v_leak)`. An 8T cell
//! costs fixed multiples of a 6T cell at the same voltage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faultmem::{BitcellKind, MemoryLayout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerParams {
    /// Nominal supply, volts.
    pub vnom: f64,
    /// 6T energy per bit read at `vnom`.
    pub read_power: f64,
    /// 6T energy per bit written at `vnom`.
    pub write_power: f64,
    /// 6T leakage per bit per unit time at `vnom`.
    pub leakage_power: f64,
    pub dynamic_exponent: f64,
    /// Leakage voltage scale, volts.
    pub v_leak: f64,
    pub eight_t_read_factor: f64,
    pub eight_t_write_factor: f64,
    pub eight_t_leakage_factor: f64,
    pub six_t_area: f64,
    pub eight_t_area: f64,
    /// Units of time of leakage charged against one access trace.
    pub leakage_weight: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            vnom: 0.95,
            read_power: 1.0,
            write_power: 1.0,
            leakage_power: 1.0,
            dynamic_exponent: 2.0,
            v_leak: 0.1,
            eight_t_read_factor: 1.20,
            eight_t_write_factor: 1.20,
            eight_t_leakage_factor: 1.47,
            six_t_area: 1.0,
            eight_t_area: 1.37,
            leakage_weight: 1.0,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("vnom", self.vnom),
            ("read_power", self.read_power),
            ("write_power", self.write_power),
            ("leakage_power", self.leakage_power),
            ("dynamic_exponent", self.dynamic_exponent),
            ("v_leak", self.v_leak),
            ("eight_t_read_factor", self.eight_t_read_factor),
            ("eight_t_write_factor", self.eight_t_write_factor),
            ("eight_t_leakage_factor", self.eight_t_leakage_factor),
            ("six_t_area", self.six_t_area),
            ("eight_t_area", self.eight_t_area),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidPowerParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !self.leakage_weight.is_finite() || self.leakage_weight < 0.0 {
            return Err(Error::InvalidPowerParams(format!(
                "leakage_weight must be non-negative, got {}",
                self.leakage_weight
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn cell_area(&self, kind: BitcellKind) -> f64 {
        match kind {
            BitcellKind::SixT => self.six_t_area,
            BitcellKind::EightT => self.eight_t_area,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerOp {
    Read,
    Write,
    Leak,
}

/// Power of one bitcell for one access (read/write) or one unit of time (leak).
pub fn cell_power(params: &PowerParams, kind: BitcellKind, op: PowerOp, volts: f64) -> f64 {
    let eight = kind == BitcellKind::EightT;
    let ratio = volts / params.vnom;
    match op {
        PowerOp::Read | PowerOp::Write => {
            let (nominal, factor) = if op == PowerOp::Read {
                (params.read_power, params.eight_t_read_factor)
            } else {
                (params.write_power, params.eight_t_write_factor)
            };
            let p = nominal * ratio.powf(params.dynamic_exponent);
            if eight {
                p * factor
            } else {
                p
            }
        }
        PowerOp::Leak => {
            let p = params.leakage_power * ratio * ((volts - params.vnom) / params.v_leak).exp();
            if eight {
                p * params.eight_t_leakage_factor
            } else {
                p
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub area_units: f64,
    /// Same array built from 6T cells only.
    pub all_six_t_units: f64,
    /// `area_units / all_six_t_units - 1`.
    pub overhead_fraction: f64,
}

fn cell_counts(
    layout: &MemoryLayout,
    bank_shapes: &[(usize, usize)],
) -> Result<Vec<(f64, f64, f64)>> {
    let ks = layout.resolve(bank_shapes.len())?;
    let wb = layout.word_bits();
    Ok(bank_shapes
        .iter()
        .zip(ks)
        .map(|(&(r, c), k)| {
            let words = (r * c) as f64;
            (words, words * (wb - k) as f64, words * k as f64)
        })
        .collect())
}

pub fn area(
    params: &PowerParams,
    layout: &MemoryLayout,
    bank_shapes: &[(usize, usize)],
) -> Result<AreaReport> {
    let counts = cell_counts(layout, bank_shapes)?;
    let six = counts.iter().map(|c| c.1).sum::<f64>();
    let eight = counts.iter().map(|c| c.2).sum::<f64>();
    let area_units = six * params.six_t_area + eight * params.eight_t_area;
    let all_six_t_units = (six + eight) * params.six_t_area;
    Ok(AreaReport {
        area_units,
        all_six_t_units,
        overhead_fraction: area_units / all_six_t_units - 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BankAccesses {
    /// Word reads.
    pub reads: u64,
    /// Word writes.
    pub writes: u64,
}

/// Word read/write counts per weight bank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessTrace {
    pub banks: Vec<BankAccesses>,
}

impl AccessTrace {
    /// Every word of every bank read `reads` times and written `writes` times.
    pub fn per_word(bank_shapes: &[(usize, usize)], reads: u64, writes: u64) -> Self {
        Self {
            banks: bank_shapes
                .iter()
                .map(|&(r, c)| {
                    let words = (r * c) as u64;
                    BankAccesses {
                        reads: words * reads,
                        writes: words * writes,
                    }
                })
                .collect(),
        }
    }

    pub fn zero(banks: usize) -> Self {
        Self {
            banks: vec![BankAccesses::default(); banks],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAreaReport {
    pub voltage: f64,
    pub read_power: f64,
    pub write_power: f64,
    /// Leakage over `leakage_weight` units of time.
    pub leakage_power: f64,
    pub total: f64,
    pub area_units: f64,
    pub area_overhead: f64,
}

/// Sums per-bit access and leakage power over a layout.
pub fn aggregate(
    params: &PowerParams,
    layout: &MemoryLayout,
    bank_shapes: &[(usize, usize)],
    trace: &AccessTrace,
    volts: f64,
) -> Result<PowerAreaReport> {
    if trace.banks.len() != bank_shapes.len() {
        return Err(Error::DimensionMismatch {
            expected: bank_shapes.len(),
            actual: trace.banks.len(),
            context: "access trace bank count",
        });
    }
    let wb = layout.word_bits() as f64;
    let ks = layout.resolve(bank_shapes.len())?;
    let counts = cell_counts(layout, bank_shapes)?;
    let per_bit = |op| {
        (
            cell_power(params, BitcellKind::SixT, op, volts),
            cell_power(params, BitcellKind::EightT, op, volts),
        )
    };
    let (r6, r8) = per_bit(PowerOp::Read);
    let (w6, w8) = per_bit(PowerOp::Write);
    let (l6, l8) = per_bit(PowerOp::Leak);

    let mut read = 0.0;
    let mut write = 0.0;
    let mut leak = 0.0;
    for ((acc, &k), &(_, six, eight)) in trace.banks.iter().zip(&ks).zip(&counts) {
        let (n6, n8) = (wb - k as f64, k as f64);
        read += acc.reads as f64 * (n6 * r6 + n8 * r8);
        write += acc.writes as f64 * (n6 * w6 + n8 * w8);
        leak += six * l6 + eight * l8;
    }
    let leak = leak * params.leakage_weight;
    let a = area(params, layout, bank_shapes)?;
    Ok(PowerAreaReport {
        voltage: volts,
        read_power: read,
        write_power: write,
        leakage_power: leak,
        total: read + write + leak,
        area_units: a.area_units,
        area_overhead: a.overhead_fraction,
    })
}

/// Percentage reduction relative to a baseline, `100 * (1 - candidate / baseline)`.
///
/// A component whose baseline is zero has no defined saving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Savings {
    pub read_pct: Option<f64>,
    pub write_pct: Option<f64>,
    pub leakage_pct: Option<f64>,
    pub total_pct: f64,
}

pub fn savings(report: &PowerAreaReport, baseline: &PowerAreaReport) -> Result<Savings> {
    if baseline.total == 0.0 {
        return Err(Error::ZeroBaseline { component: "total" });
    }
    let pct = |c: f64, b: f64| (b != 0.0).then(|| 100.0 * (1.0 - c / b));
    Ok(Savings {
        read_pct: pct(report.read_power, baseline.read_power),
        write_pct: pct(report.write_power, baseline.write_power),
        leakage_pct: pct(report.leakage_power, baseline.leakage_power),
        total_pct: 100.0 * (1.0 - report.total / baseline.total),
    })
}
