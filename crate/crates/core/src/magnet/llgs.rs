//! Fixed-step RK4 integration of the Landau-Lifshitz-Gilbert-Slonczewski
//! equation for a single macrospin.
//!
//! The Gilbert form `dm/dt = T(m) + α·m × dm/dt` with
//! `T = −γµ0·(m × H_eff + H_s·m × (m × p̂))` is solved explicitly as
//! `dm/dt = (T + α·m × T)/(1 + α²)`. `H_s = ℏ·I_S/(2e·µ0·M_s·V)` is the
//! damping-like spin-torque field; a positive spin current drives m toward p̂.

use serde::{Deserialize, Serialize};

use super::{effective_field, MagnetParams, Vec3};
use crate::error::{ensure_finite, Error, Result};
use crate::units::{HBAR, MU0, Q_E};

pub const DEFAULT_STEP: f64 = 0.1e-12;
pub const MAX_STEP: f64 = 1e-12;

const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinTorque {
    /// Spin current in amps; negative values reverse the effective polarization.
    pub current: f64,
    /// Unit polarization axis p̂.
    pub polarization: Vec3,
}

impl SpinTorque {
    pub fn new(current: f64, polarization: Vec3) -> Self {
        Self { current, polarization }
    }

    pub fn none() -> Self {
        Self { current: 0.0, polarization: Vec3::z() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationState {
    pub m: Vec3,
    pub time: f64,
}

impl MagnetizationState {
    pub fn new(m: Vec3) -> Self {
        Self { m, time: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<MagnetizationState>,
    /// Largest |‖m‖ − 1| seen before renormalization over all steps.
    pub max_step_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &MagnetizationState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

struct Dynamics<'a> {
    params: &'a MagnetParams,
    gamma_mu0: f64,
    alpha: f64,
    torque_field: f64,
    polarization: Vec3,
}

impl<'a> Dynamics<'a> {
    fn new(params: &'a MagnetParams, torque: &SpinTorque) -> Self {
        let ms = params.saturation_magnetization;
        Self {
            params,
            gamma_mu0: params.gyromagnetic_ratio * MU0,
            alpha: params.damping,
            torque_field: HBAR * torque.current / (2.0 * Q_E * MU0 * ms * params.volume()),
            polarization: torque.polarization,
        }
    }

    fn rate(&self, m: &Vec3) -> Vec3 {
        let h = effective_field(m, self.params);
        let stt = m.cross(&m.cross(&self.polarization));
        let t = -self.gamma_mu0 * (m.cross(&h) + self.torque_field * stt);
        (t + self.alpha * m.cross(&t)) / (1.0 + self.alpha * self.alpha)
    }

    /// One RK4 step; returns the renormalized state and the norm drift.
    fn step(&self, m: &Vec3, dt: f64) -> (Vec3, f64) {
        let k1 = self.rate(m);
        let k2 = self.rate(&(m + 0.5 * dt * k1));
        let k3 = self.rate(&(m + 0.5 * dt * k2));
        let k4 = self.rate(&(m + dt * k3));
        let next = m + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let norm = next.norm();
        (next / norm, (norm - 1.0).abs())
    }
}

fn check_step(dt: f64) -> Result<()> {
    ensure_finite("dt", dt)?;
    if dt > MAX_STEP {
        return Err(Error::StepSize { dt });
    }
    if dt <= 0.0 {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

fn check_unit(m: &Vec3) -> Result<()> {
    if !m.iter().all(|c| c.is_finite()) || (m.norm() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "initial magnetization must be a unit vector (‖m‖ = {})",
            m.norm()
        )));
    }
    Ok(())
}

/// Integrates from `m0` to `m0.time + t_end`, recording every step.
pub fn llgs_integrate(
    m0: MagnetizationState,
    torque: &SpinTorque,
    params: &MagnetParams,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    check_step(dt)?;
    check_unit(&m0.m)?;
    if !(t_end >= dt) {
        return Err(Error::InvalidInput(format!("t_end {t_end:e} s is shorter than one step")));
    }
    let dynamics = Dynamics::new(params, torque);
    let steps = (t_end / dt).round() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(m0);
    let mut m = m0.m;
    let mut max_step_drift = 0.0_f64;
    for k in 1..=steps {
        let (next, drift) = dynamics.step(&m, dt);
        max_step_drift = max_step_drift.max(drift);
        m = next;
        states.push(MagnetizationState { m, time: m0.time + k as f64 * dt });
    }
    Ok(Trajectory { states, max_step_drift })
}

/// Time until the easy-axis component of m changes sign, linearly
/// interpolated between steps. `None` if no reversal happens within `t_max`.
pub fn reversal_time(
    m0: &Vec3,
    torque: &SpinTorque,
    params: &MagnetParams,
    dt: f64,
    t_max: f64,
) -> Result<Option<f64>> {
    check_step(dt)?;
    check_unit(m0)?;
    let easy = params.easy_axis();
    let start = m0.dot(&easy);
    if start == 0.0 {
        return Err(Error::InvalidInput("initial state lies on the hard plane".into()));
    }
    let dynamics = Dynamics::new(params, torque);
    let steps = (t_max / dt).ceil() as usize;
    let mut m = *m0;
    let mut prev = start;
    for k in 1..=steps {
        m = dynamics.step(&m, dt).0;
        let now = m.dot(&easy);
        if now.signum() != start.signum() || now == 0.0 {
            let frac = prev / (prev - now);
            return Ok(Some((k as f64 - 1.0 + frac) * dt));
        }
        prev = now;
    }
    Ok(None)
}

/// Easy-axis pole `sign·easy` tilted by the initial tilt angle toward the
/// hard axis. Poles of opposite sign are related by a π rotation about the
/// tilt axis.
pub fn tilted_pole(params: &MagnetParams, sign: f64) -> Vec3 {
    let theta = params.initial_tilt_angle();
    sign * theta.cos() * params.easy_axis() + theta.sin() * params.tilt_axis()
}

/// Reversal time of the tilted +easy pole under a spin current `i_s`
/// polarized along −easy, at the default step.
pub fn switching_time(params: &MagnetParams, i_s: f64, t_max: f64) -> Result<Option<f64>> {
    switching_time_with_step(params, i_s, t_max, DEFAULT_STEP)
}

pub fn switching_time_with_step(params: &MagnetParams, i_s: f64, t_max: f64, dt: f64) -> Result<Option<f64>> {
    ensure_finite("I_S", i_s)?;
    let torque = SpinTorque::new(i_s, -params.easy_axis());
    reversal_time(&tilted_pole(params, 1.0), &torque, params, dt, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::defaults;
    use crate::magnet::{anisotropy_energy, magnetic_energy};

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = defaults::pma_magnet();
        let traj =
            llgs_integrate(MagnetizationState::new(Vec3::z()), &SpinTorque::none(), &p, DEFAULT_STEP, 0.2e-9)
                .unwrap();
        assert!(traj.states.iter().all(|s| s.m == Vec3::z()));
    }

    #[test]
    fn undriven_relaxation_dissipates() {
        let p = defaults::pma_magnet();
        let m0 = MagnetizationState::new(tilted_pole(&p, 1.0));
        let traj = llgs_integrate(m0, &SpinTorque::none(), &p, DEFAULT_STEP, 2e-9).unwrap();
        let scale = p.anisotropy_energy * p.volume();
        for w in traj.states.windows(2) {
            assert!(anisotropy_energy(&w[1].m, &p) <= anisotropy_energy(&w[0].m, &p) + 1e-14 * scale);
        }
        assert!(traj.last().m.z > m0.m.z);
        assert!(traj.max_step_drift < 1e-8);
    }

    #[test]
    fn ima_total_energy_dissipates() {
        let p = defaults::ima_magnet();
        let m0 = MagnetizationState::new(tilted_pole(&p, 1.0));
        let traj = llgs_integrate(m0, &SpinTorque::none(), &p, DEFAULT_STEP, 0.5e-9).unwrap();
        let scale = p.anisotropy_energy * p.volume();
        for w in traj.states.windows(2) {
            assert!(magnetic_energy(&w[1].m, &p) <= magnetic_energy(&w[0].m, &p) + 1e-13 * scale);
        }
        assert!(traj.max_step_drift < 1e-8);
    }

    #[test]
    fn step_and_unit_checks() {
        let p = defaults::pma_magnet();
        let m0 = MagnetizationState::new(Vec3::z());
        assert!(matches!(
            llgs_integrate(m0, &SpinTorque::none(), &p, 2e-12, 1e-9),
            Err(Error::StepSize { .. })
        ));
        let bad = MagnetizationState::new(Vec3::new(0.0, 0.0, 1.1));
        assert!(matches!(
            llgs_integrate(bad, &SpinTorque::none(), &p, DEFAULT_STEP, 1e-9),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn no_current_never_switches() {
        let p = defaults::pma_magnet();
        assert_eq!(switching_time(&p, 0.0, 5e-9).unwrap(), None);
    }

    #[test]
    fn polarization_flip_is_a_rotation() {
        let p = defaults::pma_magnet();
        let i_s = 3.0 * p.critical_spin_current();
        let a = llgs_integrate(
            MagnetizationState::new(tilted_pole(&p, 1.0)),
            &SpinTorque::new(i_s, -Vec3::z()),
            &p,
            DEFAULT_STEP,
            10e-9,
        )
        .unwrap();
        let b = llgs_integrate(
            MagnetizationState::new(tilted_pole(&p, -1.0)),
            &SpinTorque::new(i_s, Vec3::z()),
            &p,
            DEFAULT_STEP,
            10e-9,
        )
        .unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            assert_eq!(sb.m.z, -sa.m.z);
            assert_eq!(sb.m.y, -sa.m.y);
            assert_eq!(sb.m.x, sa.m.x);
        }
        assert!(a.last().m.z < -0.9);
    }
}
