//! JSON run configuration. Field names carry their units so that CGS inputs
//! (emu/cc, erg/cc, Oe) are converted to SI in exactly one place.

use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::design::{calibrate_designs, CalibratedSet, Design, DesignConfig};
use crate::error::{Error, Result};
use crate::magnet::{Anisotropy, MagnetParams, SwitchingTarget};
use crate::metrics::EnergyModelParams;
use crate::readpath::MtjConfig;
use crate::transport::{ContactResistances, DeviceParams, Flavor};
use crate::units::{emu_per_cc_to_a_per_m, erg_per_cc_to_j_per_m3, oe_to_a_per_m, thermal_voltage, GAMMA};

/// Built-in parameter sets in SI units.
pub mod defaults {
    use super::*;
    use std::f64::consts::PI;

    pub const V_DD: f64 = 1.1;
    pub const V_READ: f64 = 0.4;
    pub const GUARD_BAND: f64 = 0.2;
    /// Read-network resistor segments per channel half and per arm.
    pub const SEGMENTS: usize = 8;
    /// MTJ resistance-area product (Ω·m²), 9 Ω·µm².
    pub const RA_PRODUCT: f64 = 9e-12;
    pub const TMR: f64 = 1.0;

    /// Switching-time anchors of the gate-voltage sweep.
    pub fn switching_anchors() -> Vec<SwitchingTarget> {
        vec![SwitchingTarget { v_gs: -1.0, time: 3.2e-9 }, SwitchingTarget { v_gs: -1.2, time: 1.5e-9 }]
    }

    pub fn vsh_device() -> DeviceParams {
        DeviceParams {
            flavor: Flavor::Vsh,
            gate_length: 45e-9,
            channel_width: 60e-9,
            mtj_diameter: 30e-9,
            arm_length: 100e-9,
            arm_width: 60e-9,
            spin_hall_angle: 1.0,
            spin_flip_length: 550e-9,
            threshold_voltage: -0.3,
            // placeholder until drive calibration
            transconductance: 1e-3,
            ideality: 1.2,
            thermal_voltage: thermal_voltage(300.0),
            saturation_voltage: 0.3,
            p_type: true,
            contacts: ContactResistances { drain: 1e3, source: 1e3, mtj_interface: 500.0 },
            hm_width: 60e-9,
            hm_thickness: 3e-9,
            hm_length: 120e-9,
            hm_resistivity: 2e-6,
            access_resistance: 5e3,
            mtj_area: PI * 15e-9 * 15e-9,
        }
    }

    pub fn gsh_device() -> DeviceParams {
        DeviceParams {
            flavor: Flavor::Gsh,
            spin_hall_angle: 0.3,
            spin_flip_length: 1.5e-9,
            mtj_area: PI * 30e-9 * 15e-9,
            contacts: ContactResistances { drain: 8e3, source: 8e3, mtj_interface: 500.0 },
            access_resistance: 5.5e3,
            ..vsh_device()
        }
    }

    pub fn pma_magnet() -> MagnetParams {
        MagnetParams {
            anisotropy: Anisotropy::Pma,
            saturation_magnetization: emu_per_cc_to_a_per_m(1257.3),
            anisotropy_energy: erg_per_cc_to_j_per_m3(2.5e6),
            thickness: 1.25e-9,
            semi_axes: (15e-9, 15e-9),
            damping: 0.01,
            gyromagnetic_ratio: GAMMA,
            temperature: 300.0,
            initial_tilt: None,
            reference_anisotropy_field: Some(oe_to_a_per_m(3900.0)),
        }
    }

    pub fn ima_magnet() -> MagnetParams {
        MagnetParams {
            anisotropy: Anisotropy::Ima,
            anisotropy_energy: erg_per_cc_to_j_per_m3(0.84e6),
            thickness: 1.75e-9,
            semi_axes: (30e-9, 15e-9),
            reference_anisotropy_field: Some(oe_to_a_per_m(1330.0)),
            ..pma_magnet()
        }
    }

    pub fn mtj_for(magnet: &MagnetParams) -> MtjConfig {
        MtjConfig::from_ra(RA_PRODUCT, magnet.area(), TMR)
    }

    pub fn design_config(design: Design) -> DesignConfig {
        let (device, magnet) = match design.flavor() {
            Flavor::Vsh => (vsh_device(), pma_magnet()),
            Flavor::Gsh => (gsh_device(), ima_magnet()),
        };
        DesignConfig { design, mtj: mtj_for(&magnet), device, magnet, segments: SEGMENTS }
    }

    /// All four designs calibrated against the default anchors.
    pub fn calibrated_designs() -> Result<CalibratedSet> {
        let configs: Vec<_> = Design::ALL.iter().map(|&d| design_config(d)).collect();
        calibrate_designs(&configs, &vsh_device(), &pma_magnet(), &switching_anchors(), V_DD, GUARD_BAND)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    #[serde(rename = "v_gs_V")]
    pub v_gs_v: f64,
    pub t_switch_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub anchors: Vec<AnchorConfig>,
    pub guard_band: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            anchors: defaults::switching_anchors()
                .iter()
                .map(|t| AnchorConfig { v_gs_v: t.v_gs, t_switch_ns: t.time * 1e9 })
                .collect(),
            guard_band: defaults::GUARD_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct DeviceConfig {
    pub gate_length_nm: f64,
    pub channel_width_nm: f64,
    pub mtj_diameter_nm: f64,
    pub arm_length_nm: f64,
    pub arm_width_nm: f64,
    pub spin_hall_angle: f64,
    pub spin_flip_length_nm: f64,
    #[serde(rename = "threshold_voltage_V")]
    pub threshold_voltage_v: f64,
    #[serde(rename = "transconductance_A_per_V2")]
    pub transconductance_a_per_v2: f64,
    pub ideality: f64,
    pub temperature_K: f64,
    #[serde(rename = "saturation_voltage_V")]
    pub saturation_voltage_v: f64,
    pub p_type: bool,
    pub drain_contact_ohm: f64,
    pub source_contact_ohm: f64,
    pub mtj_contact_ohm: f64,
    pub hm_width_nm: f64,
    pub hm_thickness_nm: f64,
    pub hm_length_nm: f64,
    pub hm_resistivity_ohm_m: f64,
    pub access_resistance_ohm: f64,
}

/// Meters to nanometers, dropping float noise below 1e-6 nm.
fn nm(x: f64) -> f64 {
    (x * 1e15).round() / 1e6
}

impl DeviceConfig {
    fn from_params(d: &DeviceParams) -> Self {
        Self {
            gate_length_nm: nm(d.gate_length),
            channel_width_nm: nm(d.channel_width),
            mtj_diameter_nm: nm(d.mtj_diameter),
            arm_length_nm: nm(d.arm_length),
            arm_width_nm: nm(d.arm_width),
            spin_hall_angle: d.spin_hall_angle,
            spin_flip_length_nm: nm(d.spin_flip_length),
            threshold_voltage_v: d.threshold_voltage,
            transconductance_a_per_v2: d.transconductance,
            ideality: d.ideality,
            temperature_K: 300.0,
            saturation_voltage_v: d.saturation_voltage,
            p_type: d.p_type,
            drain_contact_ohm: d.contacts.drain,
            source_contact_ohm: d.contacts.source,
            mtj_contact_ohm: d.contacts.mtj_interface,
            hm_width_nm: nm(d.hm_width),
            hm_thickness_nm: nm(d.hm_thickness),
            hm_length_nm: nm(d.hm_length),
            hm_resistivity_ohm_m: d.hm_resistivity,
            access_resistance_ohm: d.access_resistance,
        }
    }

    fn to_params(&self, flavor: Flavor, mtj_area: f64) -> DeviceParams {
        DeviceParams {
            flavor,
            gate_length: self.gate_length_nm * 1e-9,
            channel_width: self.channel_width_nm * 1e-9,
            mtj_diameter: self.mtj_diameter_nm * 1e-9,
            arm_length: self.arm_length_nm * 1e-9,
            arm_width: self.arm_width_nm * 1e-9,
            spin_hall_angle: self.spin_hall_angle,
            spin_flip_length: self.spin_flip_length_nm * 1e-9,
            threshold_voltage: self.threshold_voltage_v,
            transconductance: self.transconductance_a_per_v2,
            ideality: self.ideality,
            thermal_voltage: thermal_voltage(self.temperature_K),
            saturation_voltage: self.saturation_voltage_v,
            p_type: self.p_type,
            contacts: ContactResistances {
                drain: self.drain_contact_ohm,
                source: self.source_contact_ohm,
                mtj_interface: self.mtj_contact_ohm,
            },
            hm_width: self.hm_width_nm * 1e-9,
            hm_thickness: self.hm_thickness_nm * 1e-9,
            hm_length: self.hm_length_nm * 1e-9,
            hm_resistivity: self.hm_resistivity_ohm_m,
            access_resistance: self.access_resistance_ohm,
            mtj_area,
        }
    }

    pub fn vsh() -> Self {
        Self::from_params(&defaults::vsh_device())
    }

    pub fn gsh() -> Self {
        Self::from_params(&defaults::gsh_device())
    }
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self::vsh()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct MagnetConfig {
    pub Ms_emu_per_cc: f64,
    pub K_erg_per_cc: f64,
    pub Hk_Oe: Option<f64>,
    pub thickness_nm: f64,
    pub semi_axes_nm: [f64; 2],
    pub damping: f64,
    pub gyromagnetic_ratio_rad_per_s_T: f64,
    pub temperature_K: f64,
    pub initial_tilt_rad: Option<f64>,
}

impl MagnetConfig {
    fn from_params(p: &MagnetParams) -> Self {
        Self {
            Ms_emu_per_cc: p.saturation_magnetization / 1e3,
            K_erg_per_cc: p.anisotropy_energy * 10.0,
            Hk_Oe: p.reference_anisotropy_field.map(crate::units::a_per_m_to_oe),
            thickness_nm: nm(p.thickness),
            semi_axes_nm: [nm(p.semi_axes.0), nm(p.semi_axes.1)],
            damping: p.damping,
            gyromagnetic_ratio_rad_per_s_T: p.gyromagnetic_ratio,
            temperature_K: p.temperature,
            initial_tilt_rad: p.initial_tilt,
        }
    }

    pub fn pma() -> Self {
        Self::from_params(&defaults::pma_magnet())
    }

    pub fn ima() -> Self {
        Self::from_params(&defaults::ima_magnet())
    }

    fn to_params(&self, anisotropy: Anisotropy) -> MagnetParams {
        MagnetParams {
            anisotropy,
            saturation_magnetization: emu_per_cc_to_a_per_m(self.Ms_emu_per_cc),
            anisotropy_energy: erg_per_cc_to_j_per_m3(self.K_erg_per_cc),
            thickness: self.thickness_nm * 1e-9,
            semi_axes: (self.semi_axes_nm[0] * 1e-9, self.semi_axes_nm[1] * 1e-9),
            damping: self.damping,
            gyromagnetic_ratio: self.gyromagnetic_ratio_rad_per_s_T,
            temperature: self.temperature_K,
            initial_tilt: self.initial_tilt_rad,
            reference_anisotropy_field: self.Hk_Oe.map(oe_to_a_per_m),
        }
    }
}

impl Default for MagnetConfig {
    fn default() -> Self {
        Self::pma()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct MtjFileConfig {
    pub RA_ohm_um2: f64,
    pub tmr: f64,
}

impl Default for MtjFileConfig {
    fn default() -> Self {
        Self { RA_ohm_um2: defaults::RA_PRODUCT * 1e12, tmr: defaults::TMR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "v_gs_start_V")]
    pub v_gs_start_v: f64,
    #[serde(rename = "v_gs_stop_V")]
    pub v_gs_stop_v: f64,
    #[serde(rename = "v_gs_step_V")]
    pub v_gs_step_v: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { v_gs_start_v: -1.2, v_gs_stop_v: -1.0, v_gs_step_v: 0.05 }
    }
}

impl SweepConfig {
    /// Gate voltages from start to stop inclusive.
    pub fn points(&self) -> Result<Vec<f64>> {
        let step = self.v_gs_step_v.abs();
        let span = (self.v_gs_stop_v - self.v_gs_start_v).abs();
        if !(step > 0.0) || !span.is_finite() || span < step * 1e-9 {
            return Err(Error::InvalidInput("empty sweep range".into()));
        }
        let dir = (self.v_gs_stop_v - self.v_gs_start_v).signum();
        let n = (span / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.v_gs_start_v + dir * step * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub designs: Vec<Design>,
    pub seed: u64,
    pub calibration: CalibrationConfig,
    pub array: ArrayConfig,
    pub vsh_device: DeviceConfig,
    pub gsh_device: DeviceConfig,
    pub pma_magnet: MagnetConfig,
    pub ima_magnet: MagnetConfig,
    pub mtj: MtjFileConfig,
    pub read_segments: usize,
    pub energy: EnergyModelParams,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            designs: Design::ALL.to_vec(),
            seed: 0,
            calibration: CalibrationConfig::default(),
            array: ArrayConfig::default(),
            vsh_device: DeviceConfig::vsh(),
            gsh_device: DeviceConfig::gsh(),
            pma_magnet: MagnetConfig::pma(),
            ima_magnet: MagnetConfig::ima(),
            mtj: MtjFileConfig::default(),
            read_segments: defaults::SEGMENTS,
            energy: EnergyModelParams::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn anchors(&self) -> Vec<SwitchingTarget> {
        self.calibration
            .anchors
            .iter()
            .map(|a| SwitchingTarget { v_gs: a.v_gs_v, time: a.t_switch_ns * 1e-9 })
            .collect()
    }

    pub fn pma(&self) -> MagnetParams {
        self.pma_magnet.to_params(Anisotropy::Pma)
    }

    pub fn ima(&self) -> MagnetParams {
        self.ima_magnet.to_params(Anisotropy::Ima)
    }

    pub fn vsh(&self) -> DeviceParams {
        let pma = self.pma();
        self.vsh_device.to_params(Flavor::Vsh, pma.area())
    }

    pub fn gsh(&self) -> DeviceParams {
        let ima = self.ima();
        self.gsh_device.to_params(Flavor::Gsh, ima.area())
    }

    pub fn design_config(&self, design: Design) -> DesignConfig {
        let (device, magnet) = match design.flavor() {
            Flavor::Vsh => (self.vsh(), self.pma()),
            Flavor::Gsh => (self.gsh(), self.ima()),
        };
        let mtj = MtjConfig::from_ra(self.mtj.RA_ohm_um2 * 1e-12, magnet.area(), self.mtj.tmr);
        DesignConfig { design, device, magnet, mtj, segments: self.read_segments }
    }

    pub fn design_configs(&self) -> Vec<DesignConfig> {
        self.designs.iter().map(|&d| self.design_config(d)).collect()
    }

    /// Calibrates the configured designs against the configured anchors.
    pub fn calibrate(&self) -> Result<CalibratedSet> {
        self.calibrate_designs(&self.designs)
    }

    pub fn calibrate_designs(&self, designs: &[Design]) -> Result<CalibratedSet> {
        let configs: Vec<_> = designs.iter().map(|&d| self.design_config(d)).collect();
        calibrate_designs(
            &configs,
            &self.vsh(),
            &self.pma(),
            &self.anchors(),
            self.array.v_dd,
            self.calibration.guard_band,
        )
    }
}
