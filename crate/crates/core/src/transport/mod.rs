//! Gate-controlled charge transport in the spin-generator channel and
//! charge-to-spin conversion for the VSH and GSH device flavors.
//!
//! The channel current is a smooth p-type virtual-source surrogate:
//!
//! ```text
//! Q(V_GS)    = n·φ_t·(ln(1 + exp((V_T − V_GS)/(n·φ_t))) − ln 2),  clamped at 0
//! F_sat(V)   = V / (1 + |V/V_sat|^β)^(1/β)
//! I_C        = k_I · Q(V_GS) · F_sat(V_DS)
//! ```
//!
//! The `− ln 2` offset makes the device exactly OFF at and above threshold.
//! GSH baselines have no channel model: the access transistor is a switch in
//! series with the heavy-metal strip.

mod fit;

pub use fit::{fit_spin_flip_length, fit_tlm, FitResult};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Saturation sharpness exponent of `F_sat`.
const SATURATION_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Vsh,
    Gsh,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Vsh => "VSH",
            Flavor::Gsh => "GSH",
        }
    }
}

/// Spin polarization relative to the free-layer easy axis of the MTJ that
/// receives the spin current. `Plus` drives the free layer toward the pinned
/// layer (P state).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    Plus,
    Minus,
}

impl Polarization {
    pub fn sign(self) -> f64 {
        match self {
            Polarization::Plus => 1.0,
            Polarization::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarization::Plus => Polarization::Minus,
            Polarization::Minus => Polarization::Plus,
        }
    }

    fn of_current(i_c: f64) -> Self {
        if i_c < 0.0 {
            Polarization::Minus
        } else {
            Polarization::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinCurrent {
    /// Magnitude in amps, never negative.
    pub magnitude: f64,
    pub polarization: Polarization,
}

/// Spin currents leaving the VSH channel along the two transverse arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSpinCurrents {
    pub right: SpinCurrent,
    pub left: SpinCurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactResistances {
    pub drain: f64,
    pub source: f64,
    pub mtj_interface: f64,
}

/// Geometry and transport constants of one spin-generator device.
///
/// Lengths are in meters, resistances in ohms. GSH-only fields are ignored
/// for VSH devices and vice versa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub flavor: Flavor,
    /// L_G: drain-to-source extent of the gated channel.
    pub gate_length: f64,
    /// W: channel width.
    pub channel_width: f64,
    pub mtj_diameter: f64,
    /// L_A: distance the spin current travels along the arm to the MTJ.
    pub arm_length: f64,
    pub arm_width: f64,
    pub spin_hall_angle: f64,
    /// λ_S
    pub spin_flip_length: f64,
    pub threshold_voltage: f64,
    /// k_I in A/V²; the calibration knob of the channel surrogate.
    pub transconductance: f64,
    pub ideality: f64,
    pub thermal_voltage: f64,
    pub saturation_voltage: f64,
    pub p_type: bool,
    pub contacts: ContactResistances,
    // GSH baseline
    pub hm_width: f64,
    pub hm_thickness: f64,
    pub hm_length: f64,
    pub hm_resistivity: f64,
    /// On-resistance of one access transistor.
    pub access_resistance: f64,
    /// A_MTJ for the GSH conversion ratio.
    pub mtj_area: f64,
}

impl DeviceParams {
    /// A_HM = width × thickness of the heavy-metal strip.
    pub fn hm_cross_section(&self) -> f64 {
        self.hm_width * self.hm_thickness
    }

    pub fn hm_sheet_resistance(&self) -> f64 {
        self.hm_resistivity / self.hm_thickness
    }

    /// Series resistance of the GSH write path: access transistor plus strip.
    pub fn gsh_write_resistance(&self) -> f64 {
        self.access_resistance + self.hm_sheet_resistance() * self.hm_length / self.hm_width
    }

    /// Checks hard invariants and returns soft warnings (λ_S scale).
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [
            ("gate_length", self.gate_length),
            ("channel_width", self.channel_width),
            ("mtj_diameter", self.mtj_diameter),
            ("spin_flip_length", self.spin_flip_length),
            ("ideality", self.ideality),
            ("thermal_voltage", self.thermal_voltage),
            ("saturation_voltage", self.saturation_voltage),
        ];
        for (name, v) in positive {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.spin_hall_angle > 0.0 && self.spin_hall_angle <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "spin Hall angle must lie in (0, 1], got {}",
                self.spin_hall_angle
            )));
        }
        if self.transconductance < 0.0 || !self.transconductance.is_finite() {
            return Err(Error::InvalidInput("transconductance must be non-negative".into()));
        }
        let mut warnings = Vec::new();
        match self.flavor {
            Flavor::Vsh => {
                if self.arm_length <= 0.0 || self.arm_width <= 0.0 {
                    return Err(Error::InvalidInput("VSH arm dimensions must be positive".into()));
                }
                if self.p_type && self.threshold_voltage >= 0.0 {
                    return Err(Error::InvalidInput(
                        "p-type device needs a negative threshold voltage".into(),
                    ));
                }
                if !(1e-7..=1e-5).contains(&self.spin_flip_length) {
                    warnings.push(format!(
                        "VSH spin flip length {:e} m is outside the 0.1-10 µm range",
                        self.spin_flip_length
                    ));
                }
            }
            Flavor::Gsh => {
                for (name, v) in [
                    ("hm_width", self.hm_width),
                    ("hm_thickness", self.hm_thickness),
                    ("hm_length", self.hm_length),
                    ("hm_resistivity", self.hm_resistivity),
                    ("mtj_area", self.mtj_area),
                ] {
                    if !(v > 0.0) {
                        return Err(Error::InvalidInput(format!("{name} must be positive")));
                    }
                }
                if !(1e-10..=1e-8).contains(&self.spin_flip_length) {
                    warnings.push(format!(
                        "GSH spin flip length {:e} m is outside the 0.1-10 nm range",
                        self.spin_flip_length
                    ));
                }
            }
        }
        Ok(warnings)
    }

    /// Channel charge proxy Q(V_GS) in volts; exactly zero in the OFF state.
    pub fn channel_charge(&self, v_gs: f64) -> f64 {
        let overdrive =
            if self.p_type { self.threshold_voltage - v_gs } else { v_gs - self.threshold_voltage };
        if overdrive <= 0.0 {
            return 0.0;
        }
        let n_phi = self.ideality * self.thermal_voltage;
        let x = overdrive / n_phi;
        // softplus(x) − ln 2, written to stay accurate for large x
        let softplus = if x > 30.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        (n_phi * (softplus - std::f64::consts::LN_2)).max(0.0)
    }

    pub fn is_on(&self, v_gs: f64) -> bool {
        if self.p_type {
            v_gs < self.threshold_voltage
        } else {
            v_gs > self.threshold_voltage
        }
    }
}

/// Saturating drain function, odd in `v_ds`, unit slope at the origin.
pub fn drain_saturation(v_ds: f64, v_sat: f64) -> f64 {
    let r = (v_ds / v_sat).abs();
    v_ds / (1.0 + r.powf(SATURATION_EXPONENT)).powf(1.0 / SATURATION_EXPONENT)
}

/// Signed channel current (drain → source positive).
pub fn charge_current(dev: &DeviceParams, v_gs: f64, v_ds: f64) -> Result<f64> {
    ensure_finite("V_GS", v_gs)?;
    ensure_finite("V_DS", v_ds)?;
    if v_gs.abs() > 2.0 || v_ds.abs() > 2.0 {
        return Err(Error::InvalidInput(format!(
            "terminal voltages must stay within ±2 V (V_GS = {v_gs}, V_DS = {v_ds})"
        )));
    }
    match dev.flavor {
        Flavor::Vsh => {
            let q = dev.channel_charge(v_gs);
            if q == 0.0 || v_ds == 0.0 {
                return Ok(0.0);
            }
            Ok(dev.transconductance * q * drain_saturation(v_ds, dev.saturation_voltage))
        }
        Flavor::Gsh => {
            if !dev.is_on(v_gs) || v_ds == 0.0 {
                return Ok(0.0);
            }
            Ok(v_ds / dev.gsh_write_resistance())
        }
    }
}

/// Small-signal channel conductance at V_DS = 0 for the given gate bias.
pub fn on_state_conductance(dev: &DeviceParams, v_gs: f64) -> f64 {
    match dev.flavor {
        Flavor::Vsh => dev.transconductance * dev.channel_charge(v_gs),
        Flavor::Gsh => {
            if dev.is_on(v_gs) {
                1.0 / dev.gsh_write_resistance()
            } else {
                0.0
            }
        }
    }
}

/// Sheet resistance (Ω/□) of the conducting layer under read bias.
pub fn on_state_sheet_resistance(dev: &DeviceParams, v_gs: f64) -> Result<f64> {
    match dev.flavor {
        Flavor::Vsh => {
            let g = on_state_conductance(dev, v_gs);
            if g <= 0.0 {
                return Err(Error::NotReadable(format!("channel is OFF at V_GS = {v_gs} V")));
            }
            Ok(dev.channel_width / (dev.gate_length * g))
        }
        Flavor::Gsh => Ok(dev.hm_sheet_resistance()),
    }
}

fn require_flavor(dev: &DeviceParams, flavor: Flavor) -> Result<()> {
    if dev.flavor == flavor {
        Ok(())
    } else {
        Err(Error::WrongFlavor { expected: flavor.name(), got: dev.flavor.name() })
    }
}

/// I_S = (D_MTJ / L_G)·θ_SH·I_C on each arm, before spin diffusion.
///
/// Positive charge current sends `Plus` polarization to the right arm and
/// `Minus` to the left.
pub fn vsh_spin_current(i_c: f64, dev: &DeviceParams) -> Result<ArmSpinCurrents> {
    require_flavor(dev, Flavor::Vsh)?;
    ensure_finite("I_C", i_c)?;
    let magnitude = dev.mtj_diameter / dev.gate_length * dev.spin_hall_angle * i_c.abs();
    let right = Polarization::of_current(i_c);
    Ok(ArmSpinCurrents {
        right: SpinCurrent { magnitude, polarization: right },
        left: SpinCurrent { magnitude, polarization: right.flipped() },
    })
}

/// I_S = (A_MTJ / A_HM)·θ_SH·I_C, in-plane polarized.
pub fn gsh_spin_current(i_c: f64, dev: &DeviceParams) -> Result<SpinCurrent> {
    require_flavor(dev, Flavor::Gsh)?;
    ensure_finite("I_C", i_c)?;
    Ok(SpinCurrent {
        magnitude: dev.mtj_area / dev.hm_cross_section() * dev.spin_hall_angle * i_c.abs(),
        polarization: Polarization::of_current(i_c),
    })
}

/// Exponential spin-diffusion decay over `distance`.
pub fn spin_decay(i_s0: f64, distance: f64, spin_flip_length: f64) -> Result<f64> {
    ensure_finite("distance", distance)?;
    if distance < 0.0 {
        return Err(Error::InvalidInput(format!("negative decay distance {distance}")));
    }
    if !(spin_flip_length > 0.0) {
        return Err(Error::InvalidInput("spin flip length must be positive".into()));
    }
    Ok(i_s0 * (-distance / spin_flip_length).exp())
}

/// Spin current reaching the right-hand (true-bit) MTJ for a given channel
/// current: conversion plus arm decay for VSH, conversion only for GSH.
pub fn injected_spin_current(dev: &DeviceParams, i_c: f64) -> Result<SpinCurrent> {
    match dev.flavor {
        Flavor::Vsh => {
            let arms = vsh_spin_current(i_c, dev)?;
            let magnitude = spin_decay(arms.right.magnitude, dev.arm_length, dev.spin_flip_length)?;
            Ok(SpinCurrent { magnitude, polarization: arms.right.polarization })
        }
        Flavor::Gsh => gsh_spin_current(i_c, dev),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::defaults;

    #[test]
    fn off_state_is_exactly_zero() {
        let dev = defaults::vsh_device();
        assert_eq!(charge_current(&dev, 0.0, 1.1).unwrap(), 0.0);
        assert_eq!(charge_current(&dev, dev.threshold_voltage, -1.1).unwrap(), 0.0);
        let gsh = defaults::gsh_device();
        assert_eq!(charge_current(&gsh, 0.0, 1.1).unwrap(), 0.0);
    }

    #[test]
    fn antisymmetric_in_drain_bias() {
        let dev = defaults::vsh_device();
        let fwd = charge_current(&dev, -1.1, -1.1).unwrap();
        let rev = charge_current(&dev, -1.1, 1.1).unwrap();
        assert!(fwd < 0.0);
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn current_saturates_in_drain_bias() {
        let dev = defaults::vsh_device();
        let i1 = charge_current(&dev, -1.1, -1.0).unwrap().abs();
        let i2 = charge_current(&dev, -1.1, -1.5).unwrap().abs();
        let i3 = charge_current(&dev, -1.1, -0.1).unwrap().abs();
        assert!(i2 > i1);
        assert!((i2 - i1) / i1 < 0.05);
        assert!(i1 / i3 > 2.5);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let dev = defaults::vsh_device();
        assert!(matches!(charge_current(&dev, f64::NAN, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(charge_current(&dev, -1.0, f64::INFINITY), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn eq2_ratio_for_pma_geometry() {
        let mut dev = defaults::vsh_device();
        dev.mtj_diameter = 30e-9;
        dev.gate_length = 45e-9;
        dev.spin_hall_angle = 1.0;
        let s = vsh_spin_current(30e-6, &dev).unwrap();
        assert!((s.right.magnitude - 20e-6).abs() < 1e-18);
        assert_eq!(s.right.polarization, Polarization::Plus);
        assert_eq!(s.left.polarization, Polarization::Minus);
        let r = vsh_spin_current(-30e-6, &dev).unwrap();
        assert_eq!(r.right.magnitude, s.right.magnitude);
        assert_eq!(r.right.polarization, Polarization::Minus);
        assert_eq!(r.left.polarization, Polarization::Plus);
        let z = vsh_spin_current(0.0, &dev).unwrap();
        assert_eq!((z.right.magnitude, z.left.magnitude), (0.0, 0.0));
    }

    #[test]
    fn eq1_gsh_conversion() {
        let dev = defaults::gsh_device();
        let s = gsh_spin_current(100e-6, &dev).unwrap();
        // π·30·15 nm² / (60 nm · 3 nm) · 0.3 · 100 µA
        assert!((s.magnitude - 235.619e-6).abs() < 1e-9);
        assert_eq!(gsh_spin_current(0.0, &dev).unwrap().magnitude, 0.0);
        let mut wide = dev.clone();
        wide.hm_width *= 2.0;
        let half = gsh_spin_current(100e-6, &wide).unwrap();
        assert!((half.magnitude * 2.0 - s.magnitude).abs() < 1e-18);
    }

    #[test]
    fn wrong_flavor_rejected() {
        let vsh = defaults::vsh_device();
        let gsh = defaults::gsh_device();
        assert!(matches!(gsh_spin_current(1e-6, &vsh), Err(Error::WrongFlavor { .. })));
        assert!(matches!(vsh_spin_current(1e-6, &gsh), Err(Error::WrongFlavor { .. })));
    }

    #[test]
    fn decay_examples() {
        assert_eq!(spin_decay(7e-6, 0.0, 550e-9).unwrap(), 7e-6);
        assert!((spin_decay(10e-6, 550e-9, 550e-9).unwrap() - 3.678_794e-6).abs() < 1e-11);
        assert!((spin_decay(10e-6, 100e-9, 550e-9).unwrap() - 8.337_529e-6).abs() < 1e-11);
        assert!(spin_decay(1.0, -1e-9, 550e-9).is_err());
    }

    #[test]
    fn lambda_scale_warnings() {
        let mut dev = defaults::vsh_device();
        assert!(dev.validate().unwrap().is_empty());
        dev.spin_flip_length = 1e-9;
        assert_eq!(dev.validate().unwrap().len(), 1);
        let gsh = defaults::gsh_device();
        assert!(gsh.validate().unwrap().is_empty());
    }
}
