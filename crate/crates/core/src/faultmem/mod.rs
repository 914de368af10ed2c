//! Bitcell failure models, hybrid 8T-6T memory layouts and fault injection.
//!
//! A [`ChipInstance`] is one Monte Carlo draw of process variation at a supply
//! voltage: every 6T bit is healthy, read-access faulty, write faulty or (when a
//! non-zero curve is configured) read-disturb faulty. 8T bits never fail.
//! [`write_weights`] loads a quantized network into such a chip and yields a
//! [`ChipStore`] that serves faulty reads to inference.

mod chip;
mod curve;
mod layout;
mod store;

pub use chip::{sample_chip, BankFaults, ChipInstance, FaultProbs};
pub use curve::{
    sigma_vt, BitcellKind, CellCurves, FailureCurve, FailureModel, FailureType, VtVariationParams,
};
pub use layout::{protected_positions, LayoutScheme, MemoryLayout};
pub use store::{write_weights, AccessMode, ChipStore};
