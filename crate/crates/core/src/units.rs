//! Physical constants and CGS/SI conversions. Everything inside the crate is SI.

use std::f64::consts::PI;

/// Vacuum permeability (T·m/A).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const Q_E: f64 = 1.602_176_634e-19;
/// Electron gyromagnetic ratio used by the macrospin model (rad/(s·T)).
pub const GAMMA: f64 = 1.76e11;

pub fn emu_per_cc_to_a_per_m(ms: f64) -> f64 {
    ms * 1e3
}

pub fn erg_per_cc_to_j_per_m3(k: f64) -> f64 {
    k * 0.1
}

pub fn oe_to_a_per_m(h: f64) -> f64 {
    h * 1e3 / (4.0 * PI)
}

pub fn a_per_m_to_oe(h: f64) -> f64 {
    h * 4.0 * PI / 1e3
}

/// k_B·T/q in volts.
pub fn thermal_voltage(temperature: f64) -> f64 {
    K_B * temperature / Q_E
}
