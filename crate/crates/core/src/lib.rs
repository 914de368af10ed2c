//! Simulation core for voltage-scaled SRAM synaptic storage.
//!
//! * [`quantnet`] trains sigmoid feedforward networks, quantizes their weights to
//!   two's-complement fixed point and runs inference through a [`quantnet::WeightStore`].
//! * [`faultmem`] models 6T/8T bitcell failure probabilities versus supply voltage,
//!   the all-6T / hybrid / per-bank memory layouts, and per-chip fault sampling.
//! * [`powerarea`] gives closed-form read/write/leakage power and cell area for a layout.

pub mod error;
pub mod faultmem;
pub mod powerarea;
pub mod quantnet;

pub use error::{Error, Result};
