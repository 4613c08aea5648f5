//! The four memory designs and their calibrated write operating points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnet::{
    calibrate_drive_with, switching_time, thermal_stability, CalibrationOptions, DriveCalibration,
    MagnetParams, SwitchingTarget,
};
use crate::readpath::MtjConfig;
use crate::transport::{charge_current, injected_spin_current, DeviceParams, Flavor};

/// Upper bound on simulated switching when sizing the write pulse.
pub const SWITCHING_HORIZON: f64 = 50e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Vsh,
    Dvsh,
    Gsh,
    Dgsh,
}

impl Design {
    pub const ALL: [Design; 4] = [Design::Vsh, Design::Dvsh, Design::Gsh, Design::Dgsh];

    pub fn name(self) -> &'static str {
        match self {
            Design::Vsh => "VSH",
            Design::Dvsh => "DVSH",
            Design::Gsh => "GSH",
            Design::Dgsh => "DGSH",
        }
    }

    pub fn is_differential(self) -> bool {
        matches!(self, Design::Dvsh | Design::Dgsh)
    }

    pub fn flavor(self) -> Flavor {
        match self {
            Design::Vsh | Design::Dvsh => Flavor::Vsh,
            Design::Gsh | Design::Dgsh => Flavor::Gsh,
        }
    }

    /// The GSH-family design a proposed design is normalized against.
    pub fn baseline(self) -> Design {
        if self.is_differential() {
            Design::Dgsh
        } else {
            Design::Gsh
        }
    }

    /// Independently driven write currents per cell. A VSH channel feeds both
    /// arms from one charge current; DGSH drives two heavy-metal strips.
    pub fn write_paths(self) -> usize {
        match self {
            Design::Dgsh => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vsh" => Ok(Design::Vsh),
            "dvsh" => Ok(Design::Dvsh),
            "gsh" => Ok(Design::Gsh),
            "dgsh" => Ok(Design::Dgsh),
            other => Err(Error::InvalidInput(format!("unknown design '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub design: Design,
    pub device: DeviceParams,
    pub magnet: MagnetParams,
    pub mtj: MtjConfig,
    /// Resistor segments per channel half and per arm in the read network.
    pub segments: usize,
}

impl DesignConfig {
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.device.flavor != self.design.flavor() {
            return Err(Error::WrongFlavor {
                expected: self.design.flavor().name(),
                got: self.device.flavor.name(),
            });
        }
        self.magnet.validate()?;
        self.mtj.validate()?;
        if self.segments < 4 {
            return Err(Error::InvalidInput("read network needs at least 4 segments".into()));
        }
        self.device.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WriteCalibration {
    pub v_dd: f64,
    /// |I_C| per write path under full write bias.
    pub charge_current: f64,
    /// Spin current delivered to each MTJ.
    pub spin_current: f64,
    pub switching_time: f64,
    /// Switching time plus guard band.
    pub pulse_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignModel {
    pub config: DesignConfig,
    pub write: Option<WriteCalibration>,
}

impl DesignModel {
    pub fn uncalibrated(config: DesignConfig) -> Self {
        Self { config, write: None }
    }

    /// Sizes the write pulse from the simulated worst-case switching time
    /// under full write bias (V_GS = −V_DD, |V_DS| = V_DD).
    pub fn calibrate(config: DesignConfig, v_dd: f64, guard_band: f64) -> Result<Self> {
        config.validate()?;
        let dev = &config.device;
        let v_gs = if dev.p_type { -v_dd } else { v_dd };
        let i_c = charge_current(dev, v_gs, v_dd)?.abs();
        let spin = injected_spin_current(dev, i_c)?.magnitude;
        let t = switching_time(&config.magnet, spin, SWITCHING_HORIZON)?
            .ok_or(Error::CalibrationFailure { iterations: 0, residual: f64::INFINITY })?;
        Ok(Self {
            config,
            write: Some(WriteCalibration {
                v_dd,
                charge_current: i_c,
                spin_current: spin,
                switching_time: t,
                pulse_width: t * (1.0 + guard_band),
            }),
        })
    }

    pub fn design(&self) -> Design {
        self.config.design
    }

    pub fn write_calibration(&self) -> Result<&WriteCalibration> {
        self.write.as_ref().ok_or_else(|| Error::CalibrationRequired(self.config.design.name().into()))
    }

    pub fn thermal_stability(&self) -> f64 {
        thermal_stability(&self.config.magnet)
    }
}

/// Result of calibrating a family of designs against switching-time anchors.
#[derive(Debug, Clone)]
pub struct CalibratedSet {
    pub drive: DriveCalibration,
    pub designs: Vec<DesignModel>,
}

impl CalibratedSet {
    pub fn get(&self, design: Design) -> Option<&DesignModel> {
        self.designs.iter().find(|d| d.config.design == design)
    }
}

/// Fits (k_I, α) on the reference VSH device and PMA magnet, propagates k_I
/// to every VSH-flavor device and α to every free layer (one free-layer
/// material throughout), then sizes each design's write pulse.
pub fn calibrate_designs(
    configs: &[DesignConfig],
    reference_device: &DeviceParams,
    reference_magnet: &MagnetParams,
    anchors: &[SwitchingTarget],
    v_dd: f64,
    guard_band: f64,
) -> Result<CalibratedSet> {
    let opts = CalibrationOptions { v_dd, ..CalibrationOptions::default() };
    let drive = calibrate_drive_with(anchors, reference_device, reference_magnet, &opts)?;
    let designs = configs
        .iter()
        .map(|cfg| {
            let mut cfg = cfg.clone();
            if cfg.device.flavor == Flavor::Vsh {
                cfg.device.transconductance = drive.transconductance;
            }
            cfg.magnet.damping = drive.damping;
            DesignModel::calibrate(cfg, v_dd, guard_band)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CalibratedSet { drive, designs })
}
