//! Device-to-array simulation of valley-coupled spin Hall (VSH/DVSH) and
//! giant spin Hall (GSH/DGSH) magnetic memories.
//!
//! The crate is layered bottom-up:
//!
//! - [`transport`]: gate-controlled charge current, charge-to-spin conversion,
//!   spin diffusion and the resistance extraction fits.
//! - [`magnet`]: macrospin LLGS dynamics, thermal stability and drive calibration.
//! - [`readpath`]: MTJ resistance and the distributed read network solver.
//! - [`sensing`]: the reconfigurable current sense amplifier.
//! - [`array`]: bit-cell state, the bias protocol and word-level operations.
//! - [`cim`]: the compute module (derived logic and ripple-carry addition).
//! - [`metrics`]: energy/latency models, design comparison and trace evaluation.
//!
//! [`design`] ties device, magnet and MTJ parameters into the four memory
//! designs and [`config`] maps the JSON run configuration onto them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod cim;
pub mod config;
pub mod design;
pub mod error;
pub mod magnet;
pub mod metrics;
pub mod readpath;
pub mod sensing;
pub mod transport;
pub mod units;

pub use design::{Design, DesignConfig, DesignModel};
pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
