//! Least-squares extraction of spin-flip length (non-local resistance vs arm
//! length) and of sheet/contact resistance (transfer length method).

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// λ_S (m) for the spin-flip fit, ρ (Ω/□) for TLM.
    pub fitted_value: f64,
    /// Prefactor R₀ (Ω) for the spin-flip fit, 2·R_C (Ω) for TLM.
    pub intercept: f64,
    /// RMS residual in the ordinate of the regression (ln Ω or Ω).
    pub residual_rms: f64,
}

impl FitResult {
    /// R_C for a TLM fit.
    pub fn contact_resistance(&self) -> f64 {
        self.intercept / 2.0
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    residual_rms: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<Line> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 points, got {n}")));
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if sxx <= (scale * 1e-12).powi(2) * n as f64 {
        return Err(Error::InsufficientData("abscissae are not distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    Ok(Line { slope, intercept, residual_rms: (ss / n as f64).sqrt() })
}

/// Fits ln R_NL = ln R₀ − L_A/λ_S over `(arm_length, r_nl)` points.
pub fn fit_spin_flip_length(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 points, got {}", points.len())));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(l, r) in points {
        ensure_finite("arm length", l)?;
        ensure_finite("R_NL", r)?;
        if r <= 0.0 {
            return Err(Error::InvalidInput(format!("R_NL must be positive, got {r}")));
        }
        xs.push(l);
        ys.push(r.ln());
    }
    let line = linear_fit(&xs, &ys)?;
    if line.slope >= 0.0 {
        return Err(Error::InvalidInput(
            "R_NL does not decay with arm length; no spin-flip length can be fitted".into(),
        ));
    }
    Ok(FitResult {
        fitted_value: -1.0 / line.slope,
        intercept: line.intercept.exp(),
        residual_rms: line.residual_rms,
    })
}

/// Fits R_TOT = 2·R_C + (ρ/W)·L over `(channel_length, r_tot)` points.
pub fn fit_tlm(points: &[(f64, f64)], width: f64) -> Result<FitResult> {
    if !(width > 0.0) {
        return Err(Error::InvalidInput(format!("channel width must be positive, got {width}")));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(l, r) in points {
        ensure_finite("channel length", l)?;
        ensure_finite("R_TOT", r)?;
        xs.push(l);
        ys.push(r);
    }
    let line = linear_fit(&xs, &ys)?;
    Ok(FitResult {
        fitted_value: line.slope * width,
        intercept: line.intercept,
        residual_rms: line.residual_rms,
    })
}
