//! Macrospin model of the MTJ free layer.

mod calibrate;
mod llgs;

pub use calibrate::{
    calibrate_drive, calibrate_drive_with, write_spin_current, CalibrationOptions, DriveCalibration,
    SwitchingTarget,
};
pub use llgs::{
    llgs_integrate, reversal_time, switching_time, switching_time_with_step, tilted_pole, MagnetizationState,
    SpinTorque, Trajectory, DEFAULT_STEP, MAX_STEP,
};

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{HBAR, K_B, MU0, Q_E};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anisotropy {
    /// Perpendicular: easy axis ẑ, circular free layer.
    Pma,
    /// In-plane: easy axis x̂ along the long ellipse semi-axis.
    Ima,
}

/// Free-layer constants in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetParams {
    pub anisotropy: Anisotropy,
    /// M_s (A/m)
    pub saturation_magnetization: f64,
    /// Effective anisotropy energy density K (J/m³).
    pub anisotropy_energy: f64,
    /// T_FM (m)
    pub thickness: f64,
    /// In-plane semi-axes (m): along x̂, along ŷ.
    pub semi_axes: (f64, f64),
    pub damping: f64,
    /// γ (rad/(s·T))
    pub gyromagnetic_ratio: f64,
    pub temperature: f64,
    /// Initial tilt from the easy axis; defaults to sqrt(1/(2Δ)).
    pub initial_tilt: Option<f64>,
    /// Externally quoted H_K (A/m) checked against 2K/(µ0·M_s).
    pub reference_anisotropy_field: Option<f64>,
}

impl MagnetParams {
    pub fn area(&self) -> f64 {
        PI * self.semi_axes.0 * self.semi_axes.1
    }

    pub fn volume(&self) -> f64 {
        self.area() * self.thickness
    }

    /// H_K = 2K/(µ0·M_s) in A/m.
    pub fn anisotropy_field(&self) -> f64 {
        2.0 * self.anisotropy_energy / (MU0 * self.saturation_magnetization)
    }

    pub fn easy_axis(&self) -> Vec3 {
        match self.anisotropy {
            Anisotropy::Pma => Vec3::z(),
            Anisotropy::Ima => Vec3::x(),
        }
    }

    /// Direction of the deterministic initial tilt (a hard axis).
    pub fn tilt_axis(&self) -> Vec3 {
        match self.anisotropy {
            Anisotropy::Pma => Vec3::x(),
            Anisotropy::Ima => Vec3::y(),
        }
    }

    pub fn initial_tilt_angle(&self) -> f64 {
        self.initial_tilt.unwrap_or_else(|| (1.0 / (2.0 * thermal_stability(self))).sqrt())
    }

    /// Demagnetization factors (N_x, N_y, N_z). Zero for PMA, whose K is
    /// already the effective (shape-corrected) anisotropy.
    pub fn demag_factors(&self) -> [f64; 3] {
        match self.anisotropy {
            Anisotropy::Pma => [0.0; 3],
            Anisotropy::Ima => thin_ellipsoid_demag(self.semi_axes.0, self.semi_axes.1, self.thickness / 2.0),
        }
    }

    /// Analytic zero-temperature threshold for damping-like switching (A of
    /// spin current): (2e/ℏ)·α·µ0·M_s·V·H_stiff.
    pub fn critical_spin_current(&self) -> f64 {
        let h_k = self.anisotropy_field();
        let stiffness = match self.anisotropy {
            Anisotropy::Pma => h_k,
            Anisotropy::Ima => {
                let [_, ny, nz] = self.demag_factors();
                h_k + self.saturation_magnetization * (ny + nz) / 2.0
            }
        };
        2.0 * Q_E / HBAR * self.damping * MU0 * self.saturation_magnetization * self.volume() * stiffness
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("saturation magnetization", self.saturation_magnetization),
            ("thickness", self.thickness),
            ("semi-axis a", self.semi_axes.0),
            ("semi-axis b", self.semi_axes.1),
            ("gyromagnetic ratio", self.gyromagnetic_ratio),
            ("temperature", self.temperature),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.anisotropy_energy >= 0.0) {
            return Err(Error::InvalidInput("anisotropy energy must be non-negative".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidInput(format!("damping must lie in (0, 1), got {}", self.damping)));
        }
        if let Some(h_ref) = self.reference_anisotropy_field {
            let h = self.anisotropy_field();
            if ((h - h_ref) / h_ref).abs() > 0.02 {
                return Err(Error::InvalidInput(format!(
                    "2K/(µ0·Ms) = {h:.4e} A/m deviates from the quoted H_K {h_ref:.4e} A/m by more than 2%"
                )));
            }
        }
        Ok(())
    }
}

/// Δ = K·V/(k_B·T).
pub fn thermal_stability(p: &MagnetParams) -> f64 {
    p.anisotropy_energy * p.volume() / (K_B * p.temperature)
}

/// Effective field (A/m) acting on the unit magnetization `m`.
pub fn effective_field(m: &Vec3, p: &MagnetParams) -> Vec3 {
    let h_k = p.anisotropy_field();
    match p.anisotropy {
        Anisotropy::Pma => Vec3::new(0.0, 0.0, h_k * m.z),
        Anisotropy::Ima => {
            let [_, ny, nz] = p.demag_factors();
            let ms = p.saturation_magnetization;
            Vec3::new(h_k * m.x, -ms * ny * m.y, -ms * nz * m.z)
        }
    }
}

/// Uniaxial anisotropy energy K·V·(1 − m_easy²) in joules.
pub fn anisotropy_energy(m: &Vec3, p: &MagnetParams) -> f64 {
    let easy = m.dot(&p.easy_axis());
    p.anisotropy_energy * p.volume() * (1.0 - easy * easy)
}

/// Anisotropy plus shape (demagnetization) energy; the Lyapunov function of
/// the undriven dynamics.
pub fn magnetic_energy(m: &Vec3, p: &MagnetParams) -> f64 {
    let [_, ny, nz] = p.demag_factors();
    let ms = p.saturation_magnetization;
    anisotropy_energy(m, p) + 0.5 * MU0 * ms * ms * p.volume() * (ny * m.y * m.y + nz * m.z * m.z)
}

/// Complete elliptic integrals K(m), E(m) by the arithmetic-geometric mean.
fn elliptic_ke(m: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        if c.abs() < 1e-17 {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Demagnetization factors of a thin general ellipsoid with semi-axes
/// a, b (in-plane) ≫ c (thickness), in the order (a, b, c).
fn thin_ellipsoid_demag(a: f64, b: f64, c: f64) -> [f64; 3] {
    let (long, short, swapped) = if a >= b { (a, b, false) } else { (b, a, true) };
    let e2 = 1.0 - (short / long).powi(2);
    let (n_long, n_short, n_c) = if e2 < 1e-8 {
        let n = PI / 4.0 * c / long;
        (n, n, 1.0 - 2.0 * n)
    } else {
        let (k, e) = elliptic_ke(e2);
        let s = (1.0 - e2).sqrt();
        ((c / long) * s * (k - e) / e2, (c / long) * (e - (1.0 - e2) * k) / (e2 * s), 1.0 - c * e / short)
    };
    if swapped {
        [n_short, n_long, n_c]
    } else {
        [n_long, n_short, n_c]
    }
}
