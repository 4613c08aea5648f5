//! Fits the channel transconductance k_I and free-layer damping α so that
//! the simulated switching time tracks measured (V_GS, t_switch) anchors.
//!
//! Residuals are log ratios ln(t_model/t_target); the fit is a two-parameter
//! Levenberg-Marquardt iteration in (ln k_I, ln α), started from the
//! closed-form macrospin estimate `t ≈ ln(1/tan(θ0/2)) / (γµ0·H·(I/a − α))`,
//! which is linear in (k_I, α) once inverted.

use serde::{Deserialize, Serialize};

use super::{switching_time_with_step, Anisotropy, MagnetParams, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::transport::{charge_current, injected_spin_current, DeviceParams};
use crate::units::{HBAR, MU0, Q_E};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingTarget {
    pub v_gs: f64,
    /// Target switching time (s).
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Drive voltage; the fit uses V_DS = −V_DD.
    pub v_dd: f64,
    pub dt: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { v_dd: 1.1, dt: DEFAULT_STEP, max_iterations: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCalibration {
    /// k_I (A/V²)
    pub transconductance: f64,
    pub damping: f64,
    /// t_model/t_target − 1 per target.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl DriveCalibration {
    pub fn apply(&self, dev: &mut DeviceParams, magnet: &mut MagnetParams) {
        dev.transconductance = self.transconductance;
        magnet.damping = self.damping;
    }
}

/// Spin current reaching the MTJ at gate bias `v_gs` and V_DS = −V_DD.
pub fn write_spin_current(dev: &DeviceParams, v_gs: f64, v_dd: f64) -> Result<f64> {
    let i_c = charge_current(dev, v_gs, -v_dd)?;
    Ok(injected_spin_current(dev, i_c)?.magnitude)
}

pub fn calibrate_drive(
    targets: &[SwitchingTarget],
    dev: &DeviceParams,
    magnet: &MagnetParams,
) -> Result<DriveCalibration> {
    calibrate_drive_with(targets, dev, magnet, &CalibrationOptions::default())
}

struct Problem<'a> {
    targets: &'a [SwitchingTarget],
    /// Spin current per unit k_I at each target's gate bias.
    unit_spin: Vec<f64>,
    magnet: MagnetParams,
    dt: f64,
    t_max: f64,
}

impl Problem<'_> {
    fn residuals(&self, log_k: f64, log_alpha: f64) -> Result<Vec<f64>> {
        let mut magnet = self.magnet.clone();
        magnet.damping = log_alpha.exp();
        let k = log_k.exp();
        self.targets
            .iter()
            .zip(&self.unit_spin)
            .map(|(t, s)| {
                let time = switching_time_with_step(&magnet, k * s, self.t_max, self.dt)?
                    .unwrap_or(2.0 * self.t_max);
                Ok((time / t.time).ln())
            })
            .collect()
    }
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>() / 2.0
}

/// Closed-form starting point from the linearized macrospin switching law.
fn initial_guess(problem: &Problem) -> (f64, f64) {
    let m = &problem.magnet;
    let theta0 = m.initial_tilt_angle();
    let log_factor = (1.0 / (theta0 / 2.0).tan()).ln();
    let stiffness = match m.anisotropy {
        Anisotropy::Pma => m.anisotropy_field(),
        Anisotropy::Ima => {
            let [_, ny, nz] = m.demag_factors();
            m.anisotropy_field() + m.saturation_magnetization * (ny + nz) / 2.0
        }
    };
    let rate = m.gyromagnetic_ratio * MU0 * stiffness;
    // critical spin current per unit damping
    let per_alpha = 2.0 * Q_E / HBAR * MU0 * m.saturation_magnetization * m.volume() * stiffness;
    // y_i = u·s_i − α with u = k_I / per_alpha
    let (mut sxx, mut sx, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0);
    let n = problem.targets.len() as f64;
    for (t, s) in problem.targets.iter().zip(&problem.unit_spin) {
        let y = log_factor / (rate * t.time);
        sxx += s * s;
        sx += s;
        sxy += s * y;
        sy += y;
    }
    let det = sxx * n - sx * sx;
    let u = (n * sxy - sx * sy) / det;
    let alpha = (sx * sxy - sxx * sy) / det;
    if u > 0.0 && alpha > 1e-4 && alpha < 0.5 {
        (u * per_alpha, alpha)
    } else {
        let alpha = m.damping;
        let mean_y = sy / n;
        let mean_s = sx / n;
        ((mean_y + alpha) / mean_s * per_alpha, alpha)
    }
}

fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < f64::MIN_POSITIVE || !det.is_finite() {
        return None;
    }
    Some([(b[0] * a[1][1] - b[1] * a[0][1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

pub fn calibrate_drive_with(
    targets: &[SwitchingTarget],
    dev: &DeviceParams,
    magnet: &MagnetParams,
    opts: &CalibrationOptions,
) -> Result<DriveCalibration> {
    if targets.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "drive calibration needs at least 2 targets, got {}",
            targets.len()
        )));
    }
    if targets.iter().any(|t| !(t.time > 0.0)) {
        return Err(Error::InvalidInput("target switching times must be positive".into()));
    }
    let mut unit_dev = dev.clone();
    unit_dev.transconductance = 1.0;
    let unit_spin = targets
        .iter()
        .map(|t| write_spin_current(&unit_dev, t.v_gs, opts.v_dd))
        .collect::<Result<Vec<_>>>()?;
    if unit_spin.iter().any(|&s| s <= 0.0) {
        return Err(Error::InvalidInput("device is OFF at a calibration gate bias".into()));
    }
    let t_max = 4.0 * targets.iter().map(|t| t.time).fold(0.0, f64::max);
    let problem = Problem { targets, unit_spin, magnet: magnet.clone(), dt: opts.dt, t_max };

    let (k0, a0) = initial_guess(&problem);
    let mut x = [k0.ln(), a0.ln()];
    let max_log_alpha = 0.9_f64.ln();
    let mut r = problem.residuals(x[0], x[1])?;
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let h = 1e-5;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        if r.iter().all(|v| v.abs() < 1e-9) {
            converged = true;
            break;
        }
        let mut jac = vec![[0.0; 2]; r.len()];
        for j in 0..2 {
            let mut up = x;
            let mut dn = x;
            up[j] += h;
            dn[j] -= h;
            let ru = problem.residuals(up[0], up[1])?;
            let rd = problem.residuals(dn[0], dn[1])?;
            for i in 0..r.len() {
                jac[i][j] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..2 {
                jtr[a] += row[a] * ri;
                for b in 0..2 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let grad_norm = (jtr[0] * jtr[0] + jtr[1] * jtr[1]).sqrt();
        if grad_norm < 1e-12 {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..20 {
            let mut damped = jtj;
            damped[0][0] *= 1.0 + lambda;
            damped[1][1] *= 1.0 + lambda;
            let Some(step) = solve2(damped, [-jtr[0], -jtr[1]]) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [x[0] + step[0], (x[1] + step[1]).min(max_log_alpha)];
            let rt = problem.residuals(trial[0], trial[1])?;
            let ct = cost(&rt);
            if ct < c {
                let small = step[0].abs() < 1e-12 && step[1].abs() < 1e-12;
                x = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no downhill step left: a stationary point of the least-squares cost
            converged = grad_norm < 1e-6;
            break;
        }
        if converged {
            break;
        }
    }
    if !converged && !r.iter().all(|v| v.abs() < 1e-9) {
        return Err(Error::CalibrationFailure { iterations, residual: (2.0 * c).sqrt() });
    }
    Ok(DriveCalibration {
        transconductance: x[0].exp(),
        damping: x[1].exp(),
        residuals: r.iter().map(|v| v.exp() - 1.0).collect(),
        iterations,
    })
}
