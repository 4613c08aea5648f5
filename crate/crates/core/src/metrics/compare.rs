use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{iso_sense_margin_search, op_energy, sense_margin, EnergyContext, EnergyModelParams, OpKind};
use crate::array::ArrayConfig;
use crate::design::{Design, DesignModel};
use crate::error::{Error, Result};

/// Largest allowed spread of thermal stability across compared designs.
pub const ISO_BARRIER_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReadPolicy {
    /// Every design reads at the array's V_READ.
    Fixed,
    /// Each design reads at the V_READ that gives this sense margin (A).
    IsoSenseMargin(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub design: Design,
    pub baseline: Design,
    pub thermal_stability: f64,
    pub v_read: f64,
    /// Write pulse: switching time plus guard band (s).
    pub write_time: f64,
    pub write_energy: f64,
    pub read_energy: f64,
    pub sense_margin: f64,
    pub area: f64,
    pub cim_add_energy: f64,
    pub nmc_add_energy: f64,
    pub norm_write_time: f64,
    pub norm_write_energy: f64,
    pub norm_read_energy: f64,
    pub norm_sense_margin: f64,
    pub norm_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub policy: ReadPolicy,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, d: Design) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.design == d)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "design,baseline,thermal_stability,v_read_V,write_time_s,write_energy_J,\
             read_energy_J,sense_margin_A,area,cim_add_energy_J,nmc_add_energy_J,\
             norm_write_time,norm_write_energy,norm_read_energy,norm_sense_margin,norm_area\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6e},{:.6e},{:.6e},{:.6e},{:.6},{:.6e},{:.6e},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                r.design,
                r.baseline,
                r.thermal_stability,
                r.v_read,
                r.write_time,
                r.write_energy,
                r.read_energy,
                r.sense_margin,
                r.area,
                r.cim_add_energy,
                r.nmc_add_energy,
                r.norm_write_time,
                r.norm_write_energy,
                r.norm_read_energy,
                r.norm_sense_margin,
                r.norm_area,
            ));
        }
        out
    }
}

struct Raw {
    design: Design,
    delta: f64,
    v_read: f64,
    wt: f64,
    we: f64,
    re: f64,
    sm: f64,
    area: f64,
    cim: f64,
    nmc: f64,
}

fn evaluate(
    model: &DesignModel,
    array: &ArrayConfig,
    params: &EnergyModelParams,
    policy: ReadPolicy,
) -> Result<Raw> {
    let v_read = match policy {
        ReadPolicy::Fixed => array.v_read,
        ReadPolicy::IsoSenseMargin(t) => iso_sense_margin_search(model, array.v_dd, t)?,
    };
    let ctx = EnergyContext { array, params, v_read };
    let d = model.design();
    Ok(Raw {
        design: d,
        delta: model.thermal_stability(),
        v_read,
        wt: model.write_calibration()?.pulse_width,
        we: op_energy(model, OpKind::Write, &ctx)?.total,
        re: op_energy(model, OpKind::Read, &ctx)?.total,
        sm: sense_margin(model, array.v_dd, v_read)?,
        area: params.area_scale.get(d),
        cim: op_energy(model, OpKind::CimAdd, &ctx)?.total,
        nmc: op_energy(model, OpKind::NmcAdd, &ctx)?.total,
    })
}

/// Evaluates every design and normalizes each against its GSH-family
/// baseline (itself when the baseline is not in the set).
pub fn compare_designs(
    models: &[DesignModel],
    array: &ArrayConfig,
    params: &EnergyModelParams,
    policy: ReadPolicy,
) -> Result<ComparisonTable> {
    if models.is_empty() {
        return Err(Error::InvalidInput("no designs to compare".into()));
    }
    let calibrated = models.iter().filter(|m| m.write.is_some()).count();
    if calibrated != 0 && calibrated != models.len() {
        return Err(Error::MixedCalibration(format!("{calibrated} of {} designs calibrated", models.len())));
    }
    if calibrated == 0 {
        return Err(Error::CalibrationRequired(models[0].design().name().into()));
    }
    let deltas: Vec<f64> = models.iter().map(|m| m.thermal_stability()).collect();
    let lo = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().cloned().fold(0.0, f64::max);
    if hi > lo * (1.0 + ISO_BARRIER_TOLERANCE) {
        return Err(Error::InvalidInput(format!(
            "designs are not iso-barrier: thermal stability spans {lo:.1} to {hi:.1} k_BT"
        )));
    }
    let raw = models.par_iter().map(|m| evaluate(m, array, params, policy)).collect::<Result<Vec<_>>>()?;
    let rows = raw
        .iter()
        .map(|r| {
            let base = raw.iter().find(|b| b.design == r.design.baseline()).unwrap_or(r);
            ComparisonRow {
                design: r.design,
                baseline: base.design,
                thermal_stability: r.delta,
                v_read: r.v_read,
                write_time: r.wt,
                write_energy: r.we,
                read_energy: r.re,
                sense_margin: r.sm,
                area: r.area,
                cim_add_energy: r.cim,
                nmc_add_energy: r.nmc,
                norm_write_time: r.wt / base.wt,
                norm_write_energy: r.we / base.we,
                norm_read_energy: r.re / base.re,
                norm_sense_margin: r.sm / base.sm,
                norm_area: r.area / base.area,
            }
        })
        .collect();
    Ok(ComparisonTable { policy, rows })
}
