//! Energy and latency of array operations, iso-sense-margin search, design
//! comparison tables and trace-driven system energy.
//!
//! Per word access:
//! - line switching: C_line·ΔV² for every line that leaves its HOLD level,
//!   with C_line = per-cell capacitance × cells on the line × area scale;
//! - conduction: I·V over the write pulse or the sense window;
//! - sensing: reference-branch current × V_READ × t_sense (self-referenced
//!   differential reads draw none);
//! - logic: compute-module gates at a fixed energy per gate.

mod compare;
mod trace;

pub use compare::{compare_designs, ComparisonRow, ComparisonTable, ReadPolicy};
pub use trace::{evaluate_trace, ExecutionMode, TraceEnergy, WorkloadTrace};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::cim::{ADDER_GATES_PER_BIT, LOGIC_GATES_PER_BIT};
use crate::design::{Design, DesignModel};
use crate::error::{Error, Result};
use crate::magnet::{switching_time, write_spin_current, MagnetParams};
use crate::readpath::{read_current_pair, sensed_currents, CellMtjs, ReadBias};
use crate::sensing::{rcsa_resolve, reference_current, ReferenceKind, SenseMode};
use crate::transport::DeviceParams;

/// Gates of a conventional full adder in the near-memory unit.
pub const NMC_GATES_PER_BIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaScales {
    pub vsh: f64,
    pub dvsh: f64,
    pub gsh: f64,
    pub dgsh: f64,
}

impl Default for AreaScales {
    fn default() -> Self {
        Self { vsh: 0.34, dvsh: 0.38 * 1.6, gsh: 1.0, dgsh: 1.6 }
    }
}

impl AreaScales {
    pub fn get(&self, d: Design) -> f64 {
        match d {
            Design::Vsh => self.vsh,
            Design::Dvsh => self.dvsh,
            Design::Gsh => self.gsh,
            Design::Dgsh => self.dgsh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyModelParams {
    #[serde(rename = "wl_capacitance_per_cell_F")]
    pub wl_capacitance_per_cell: f64,
    #[serde(rename = "bl_capacitance_per_cell_F")]
    pub bl_capacitance_per_cell: f64,
    #[serde(rename = "sl_capacitance_per_cell_F")]
    pub sl_capacitance_per_cell: f64,
    /// Bit-cell area relative to the GSH cell.
    pub area_scale: AreaScales,
    #[serde(rename = "driver_resistance_ohm")]
    pub driver_resistance: f64,
    #[serde(rename = "sense_time_s")]
    pub sense_time: f64,
    #[serde(rename = "gate_delay_s")]
    pub gate_delay: f64,
    #[serde(rename = "gate_energy_J")]
    pub gate_energy: f64,
    #[serde(rename = "nmc_transfer_energy_J_per_bit")]
    pub nmc_transfer_per_bit: f64,
    #[serde(rename = "sense_margin_min_A")]
    pub sm_min: f64,
}

impl Default for EnergyModelParams {
    fn default() -> Self {
        Self {
            wl_capacitance_per_cell: 0.2e-15,
            bl_capacitance_per_cell: 0.2e-15,
            sl_capacitance_per_cell: 0.2e-15,
            area_scale: AreaScales::default(),
            driver_resistance: 1e3,
            sense_time: 0.5e-9,
            gate_delay: 15e-12,
            gate_energy: 0.5e-15,
            nmc_transfer_per_bit: 50e-15,
            sm_min: crate::sensing::SM_MIN,
        }
    }
}

impl EnergyModelParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            self.wl_capacitance_per_cell,
            self.bl_capacitance_per_cell,
            self.sl_capacitance_per_cell,
            self.area_scale.vsh,
            self.area_scale.dvsh,
            self.area_scale.gsh,
            self.area_scale.dgsh,
            self.driver_resistance,
            self.sense_time,
            self.gate_delay,
            self.gate_energy,
            self.nmc_transfer_per_bit,
            self.sm_min,
        ];
        if checks.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("energy model parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Write,
    Read,
    Hold,
    /// One two-row access producing AND/NOR (or a single-ended AND/OR).
    CimLogic,
    CimAdd,
    /// Two reads, a bus transfer of both words and an adder outside the array.
    NmcAdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub op: OpKind,
    pub design: Design,
    pub line_switching_energy: f64,
    pub conduction_energy: f64,
    pub sensing_energy: f64,
    pub logic_energy: f64,
    pub transfer_energy: f64,
    pub total: f64,
    pub latency: f64,
}

impl EnergyReport {
    fn zero(op: OpKind, design: Design) -> Self {
        Self {
            op,
            design,
            line_switching_energy: 0.0,
            conduction_energy: 0.0,
            sensing_energy: 0.0,
            logic_energy: 0.0,
            transfer_energy: 0.0,
            total: 0.0,
            latency: 0.0,
        }
    }

    fn finish(mut self) -> Self {
        self.total = self.line_switching_energy
            + self.conduction_energy
            + self.sensing_energy
            + self.logic_energy
            + self.transfer_energy;
        self
    }

    fn add(mut self, other: &EnergyReport) -> Self {
        self.line_switching_energy += other.line_switching_energy;
        self.conduction_energy += other.conduction_energy;
        self.sensing_energy += other.sensing_energy;
        self.logic_energy += other.logic_energy;
        self.transfer_energy += other.transfer_energy;
        self.latency += other.latency;
        self
    }
}

/// Everything an energy evaluation needs besides the design itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyContext<'a> {
    pub array: &'a ArrayConfig,
    pub params: &'a EnergyModelParams,
    /// Read voltage used by reads and CiM accesses of this design.
    pub v_read: f64,
}

struct Lines {
    wl: f64,
    column: f64,
    sl: f64,
}

fn line_caps(design: Design, ctx: &EnergyContext) -> Lines {
    let s = ctx.params.area_scale.get(design);
    let (rows, cols) = (ctx.array.rows as f64, ctx.array.cols as f64);
    Lines {
        wl: ctx.params.wl_capacitance_per_cell * cols * s,
        column: ctx.params.bl_capacitance_per_cell * rows * s,
        sl: ctx.params.sl_capacitance_per_cell * rows * s,
    }
}

fn charge_time(c: f64, ctx: &EnergyContext) -> f64 {
    2.2 * ctx.params.driver_resistance * c
}

/// Single-cell read pair at this context's read voltage.
fn read_pair(model: &DesignModel, ctx: &EnergyContext) -> Result<(f64, f64)> {
    read_current_pair(&model.config, &ReadBias::new(ctx.array.v_dd, ctx.v_read)?)
}

/// Energy of `accesses` two-row accesses over one word, without logic.
fn cim_access_energy(model: &DesignModel, ctx: &EnergyContext, op: OpKind) -> Result<EnergyReport> {
    let d = model.design();
    let caps = line_caps(d, ctx);
    let bits = ctx.array.word_bits as f64;
    let (v_dd, v) = (ctx.array.v_dd, ctx.v_read);
    let lines_per_col = if d.is_differential() { 2.0 } else { 1.0 };
    let (i_p, i_ap) = read_pair(model, ctx)?;
    let i_ref = reference_current(ReferenceKind::CimAnd, i_p, i_ap)?;
    let t = ctx.params.sense_time;
    let mut r = EnergyReport::zero(op, d);
    r.line_switching_energy = 2.0 * caps.wl * v_dd * v_dd + bits * lines_per_col * caps.sl * v * v;
    // two cells per line, uniform operands
    r.conduction_energy = bits * lines_per_col * (i_p + i_ap) * v * t;
    r.sensing_energy = bits * lines_per_col * i_ref * v * t;
    r.latency = charge_time(caps.wl.max(caps.sl), ctx) + t;
    Ok(r)
}

/// Two-row accesses a single-ended design needs for the full logic set.
pub fn cim_accesses_per_add(design: Design) -> usize {
    if design.is_differential() {
        1
    } else {
        2
    }
}

pub fn op_energy(model: &DesignModel, op: OpKind, ctx: &EnergyContext) -> Result<EnergyReport> {
    ctx.params.validate()?;
    ctx.array.validate()?;
    let cal = *model.write_calibration()?;
    let d = model.design();
    let caps = line_caps(d, ctx);
    let bits = ctx.array.word_bits as f64;
    let v_dd = ctx.array.v_dd;
    let mut r = EnergyReport::zero(op, d);
    match op {
        OpKind::Hold => {}
        OpKind::Write => {
            // WL and one of BL/BLB per column swing rail to rail; SLs float
            r.line_switching_energy = (caps.wl + bits * caps.column) * v_dd * v_dd;
            r.conduction_energy = bits * d.write_paths() as f64 * cal.charge_current * v_dd * cal.pulse_width;
            r.latency = cal.pulse_width + charge_time(caps.wl.max(caps.column), ctx);
        }
        OpKind::Read => {
            let v = ctx.v_read;
            let (i_p, i_ap) = read_pair(model, ctx)?;
            let t = ctx.params.sense_time;
            let lines_per_col = if d.is_differential() { 2.0 } else { 1.0 };
            r.line_switching_energy = caps.wl * v_dd * v_dd + bits * lines_per_col * caps.sl * v * v;
            if d.is_differential() {
                r.conduction_energy = bits * (i_p + i_ap) * v * t;
            } else {
                r.conduction_energy = bits * 0.5 * (i_p + i_ap) * v * t;
                r.sensing_energy = bits * 0.5 * (i_p + i_ap) * v * t;
            }
            r.latency = charge_time(caps.wl.max(caps.sl), ctx) + t;
        }
        OpKind::CimLogic => {
            r = cim_access_energy(model, ctx, op)?;
            r.logic_energy = bits * LOGIC_GATES_PER_BIT as f64 * ctx.params.gate_energy;
            r.latency += 2.0 * ctx.params.gate_delay;
        }
        OpKind::CimAdd => {
            let access = cim_access_energy(model, ctx, op)?;
            for _ in 0..cim_accesses_per_add(d) {
                r = r.add(&access);
            }
            let gates = (LOGIC_GATES_PER_BIT + ADDER_GATES_PER_BIT) as f64;
            r.logic_energy = bits * gates * ctx.params.gate_energy;
            r.latency += 2.0 * ctx.params.gate_delay + bits * ctx.params.gate_delay;
        }
        OpKind::NmcAdd => {
            let read = op_energy(model, OpKind::Read, ctx)?;
            r = r.add(&read).add(&read);
            r.transfer_energy = 2.0 * bits * ctx.params.nmc_transfer_per_bit;
            r.logic_energy = bits * NMC_GATES_PER_BIT as f64 * ctx.params.gate_energy;
            r.latency += bits * ctx.params.gate_delay;
        }
    }
    Ok(r.finish())
}

/// Worst-case sense margin over both stored values at the given read voltage,
/// sensing the way a read of this design does.
pub fn sense_margin(model: &DesignModel, v_dd: f64, v_read: f64) -> Result<f64> {
    let cfg = &model.config;
    let bias = ReadBias::new(v_dd, v_read)?;
    let diff = cfg.design.is_differential();
    let (i_p, i_ap) = read_current_pair(cfg, &bias)?;
    let mut worst = f64::INFINITY;
    for bit in [false, true] {
        let s = sensed_currents(&CellMtjs::for_bit(bit, diff), cfg, &bias)?;
        let r = if diff {
            rcsa_resolve(s.i_sl, s.i_slb, SenseMode::Differential, None)?
        } else {
            let i_ref = reference_current(ReferenceKind::Read, i_p, i_ap).unwrap_or((i_p + i_ap) / 2.0);
            rcsa_resolve(s.i_sl, None, SenseMode::SingleEnded, Some(i_ref))?
        };
        worst = worst.min(r.margin);
    }
    Ok(worst)
}

/// Relative tolerance of the iso-sense-margin bisection.
pub const ISO_SM_TOLERANCE: f64 = 1e-4;

/// Bisects V_READ in (0, v_max) for a monotone margin function.
pub fn iso_sense_margin_search_with<F>(margin: F, target: f64, v_max: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::OutOfRange(format!("target sense margin {target} must be positive")));
    }
    let top = margin(v_max)?;
    if top < target {
        return Err(Error::OutOfRange(format!(
            "sense margin {top:.3e} A at V_READ = {v_max} V cannot reach {target:.3e} A"
        )));
    }
    let (mut lo, mut hi) = (0.0, v_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let sm = margin(mid)?;
        if ((sm - target) / target).abs() < ISO_SM_TOLERANCE {
            return Ok(mid);
        }
        if sm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Read voltage at which this design reaches `target` sense margin.
pub fn iso_sense_margin_search(model: &DesignModel, v_dd: f64, target: f64) -> Result<f64> {
    let v_max = v_dd * (1.0 - 1e-9);
    iso_sense_margin_search_with(|v| sense_margin(model, v_dd, v), target, v_max)
}

/// Switching time over a gate-voltage sweep, evaluated in parallel.
/// Entries are `None` where the drive never switches within `t_max`.
pub fn switching_sweep(
    dev: &DeviceParams,
    magnet: &MagnetParams,
    v_gs: &[f64],
    v_dd: f64,
    t_max: f64,
) -> Result<Vec<(f64, Option<f64>)>> {
    v_gs.par_iter()
        .map(|&v| {
            let i_s = write_spin_current(dev, v, v_dd)?;
            Ok((v, switching_time(magnet, i_s, t_max)?))
        })
        .collect()
}
