//! MTJ resistance model and the distributed read-path network.
//!
//! VSH cells read through a "T" (one arm, one MTJ) or "H" (two arms, two MTJs)
//! shaped channel: both channel terminals sit at V_DD and current flows from
//! each channel half into the arm(s), through the MTJ(s) to SL/SLB held at
//! V_DD − V_READ. GSH cells read through the heavy-metal strip halves and
//! the read access contacts; a DGSH cell is two such strips.

mod network;

pub use network::{
    solve_network, Branch, BranchId, NetworkSolution, Node, NodeId, NodeKind, ResistiveNetwork,
};

use serde::{Deserialize, Serialize};

use crate::design::DesignConfig;
use crate::error::{ensure_finite, Error, Result};
use crate::magnet::{MagnetParams, MagnetizationState};
use crate::transport::{on_state_sheet_resistance, Flavor};

/// Minimum easy-axis projection for a magnetization to count as settled.
pub const SETTLED_PROJECTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtjConfig {
    pub r_p: f64,
    /// R_AP = R_P·(1 + TMR).
    pub tmr: f64,
    pub area: f64,
}

impl MtjConfig {
    pub fn from_ra(ra: f64, area: f64, tmr: f64) -> Self {
        Self { r_p: ra / area, tmr, area }
    }

    pub fn r_ap(&self) -> f64 {
        self.r_p * (1.0 + self.tmr)
    }

    /// TMR = 0 is accepted; sensing then reports zero margin.
    pub fn validate(&self) -> Result<()> {
        ensure_finite("R_P", self.r_p)?;
        ensure_finite("TMR", self.tmr)?;
        if self.r_p <= 0.0 || self.tmr < 0.0 {
            return Err(Error::InvalidInput(format!(
                "MTJ needs R_P > 0 and TMR >= 0 (R_P = {}, TMR = {})",
                self.r_p, self.tmr
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MtjState {
    P,
    Ap,
}

impl MtjState {
    /// The pinned layer points along +easy axis.
    pub fn of_magnetization(m: &MagnetizationState, magnet: &MagnetParams) -> Result<Self> {
        let proj = m.m.dot(&magnet.easy_axis());
        if proj.abs() <= SETTLED_PROJECTION {
            return Err(Error::NotReadable(format!(
                "free layer not settled (easy-axis projection {proj:.3})"
            )));
        }
        Ok(if proj > 0.0 { MtjState::P } else { MtjState::Ap })
    }
}

pub fn mtj_resistance(state: MtjState, cfg: &MtjConfig) -> f64 {
    match state {
        MtjState::P => cfg.r_p,
        MtjState::Ap => cfg.r_ap(),
    }
}

/// MTJ states of one cell; `left` holds the complement in differential cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellMtjs {
    pub right: MtjState,
    pub left: Option<MtjState>,
}

impl CellMtjs {
    /// Nominal states for a stored bit: bit-0 puts MTJ_R in P.
    pub fn for_bit(bit: bool, differential: bool) -> Self {
        let (r, l) = if bit { (MtjState::Ap, MtjState::P) } else { (MtjState::P, MtjState::Ap) };
        Self { right: r, left: differential.then_some(l) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadBias {
    pub v_dd: f64,
    pub v_read: f64,
}

impl ReadBias {
    pub fn new(v_dd: f64, v_read: f64) -> Result<Self> {
        ensure_finite("V_DD", v_dd)?;
        ensure_finite("V_READ", v_read)?;
        if !(v_read >= 0.0 && v_read < v_dd) {
            return Err(Error::InvalidInput(format!(
                "read bias needs 0 <= V_READ < V_DD (V_READ = {v_read}, V_DD = {v_dd})"
            )));
        }
        Ok(Self { v_dd, v_read })
    }

    /// WL = 0 with BL = BLB = V_DD.
    pub fn gate_source_voltage(&self) -> f64 {
        -self.v_dd
    }
}

/// Read network of several cells sharing one column (both rows asserted
/// during CiM), with the MTJ branches into SL and SLB recorded.
#[derive(Debug, Clone)]
pub struct ReadNetwork {
    pub network: ResistiveNetwork,
    pub sl_branches: Vec<BranchId>,
    pub slb_branches: Vec<BranchId>,
}

struct Terminals {
    bl: NodeId,
    blb: NodeId,
    sl: NodeId,
    slb: Option<NodeId>,
}

/// Channel (VSH) or heavy-metal (GSH) hub with its two half-resistances.
fn add_hub(
    net: &mut ResistiveNetwork,
    t: &Terminals,
    cfg: &DesignConfig,
    sheet: f64,
    tag: &str,
) -> Result<NodeId> {
    let dev = &cfg.device;
    let n = cfg.segments;
    let (half, width) = match dev.flavor {
        Flavor::Vsh => (dev.gate_length / 2.0, dev.channel_width),
        Flavor::Gsh => (dev.hm_length / 2.0, dev.hm_width),
    };
    let r_half = sheet * half / width;
    let center = net.add_floating(format!("{tag}.c"));
    // source terminal on BL, drain terminal on BLB
    let s = net.add_floating(format!("{tag}.s"));
    let d = net.add_floating(format!("{tag}.d"));
    net.add_branch(t.bl, s, dev.contacts.source)?;
    net.add_branch(t.blb, d, dev.contacts.drain)?;
    net.add_segmented(s, center, r_half, n, &format!("{tag}.hs"))?;
    net.add_segmented(d, center, r_half, n, &format!("{tag}.hd"))?;
    Ok(center)
}

/// Arm (VSH only) plus MTJ interface and MTJ branch; returns the MTJ branch.
fn add_mtj_path(
    net: &mut ResistiveNetwork,
    from: NodeId,
    line: NodeId,
    state: MtjState,
    cfg: &DesignConfig,
    sheet: f64,
    tag: &str,
) -> Result<BranchId> {
    let dev = &cfg.device;
    let mut end = from;
    if dev.flavor == Flavor::Vsh {
        end = net.add_floating(format!("{tag}.e"));
        let r_arm = sheet * dev.arm_length / dev.arm_width;
        net.add_segmented(from, end, r_arm, cfg.segments, &format!("{tag}.a"))?;
    }
    let top = net.add_floating(format!("{tag}.m"));
    net.add_branch(end, top, dev.contacts.mtj_interface)?;
    net.add_branch(top, line, mtj_resistance(state, &cfg.mtj))
}

fn check_cell(cell: &CellMtjs, cfg: &DesignConfig) -> Result<()> {
    if cell.left.is_some() != cfg.design.is_differential() {
        return Err(Error::InvalidInput(format!(
            "{} cell needs {} MTJ(s)",
            cfg.design,
            if cfg.design.is_differential() { 2 } else { 1 }
        )));
    }
    Ok(())
}

/// Builds the read network for the asserted cells of one column.
pub fn build_column_network(cells: &[CellMtjs], cfg: &DesignConfig, bias: &ReadBias) -> Result<ReadNetwork> {
    if cells.is_empty() {
        return Err(Error::InvalidInput("no cells asserted".into()));
    }
    for c in cells {
        check_cell(c, cfg)?;
    }
    cfg.mtj.validate()?;
    if cfg.segments < 4 {
        return Err(Error::InvalidInput("read network needs at least 4 segments".into()));
    }
    let sheet = on_state_sheet_resistance(&cfg.device, bias.gate_source_voltage())?;
    let differential = cfg.design.is_differential();
    let mut net = ResistiveNetwork::new();
    let v_sense = bias.v_dd - bias.v_read;
    let t = Terminals {
        bl: net.add_fixed("BL", bias.v_dd),
        blb: net.add_fixed("BLB", bias.v_dd),
        sl: net.add_fixed("SL", v_sense),
        slb: differential.then(|| net.add_fixed("SLB", v_sense)),
    };
    let mut sl_branches = Vec::new();
    let mut slb_branches = Vec::new();
    for (k, cell) in cells.iter().enumerate() {
        let tag = format!("c{k}");
        match (cfg.device.flavor, cell.left, t.slb) {
            (Flavor::Vsh, left, slb) => {
                let hub = add_hub(&mut net, &t, cfg, sheet, &tag)?;
                sl_branches.push(add_mtj_path(
                    &mut net,
                    hub,
                    t.sl,
                    cell.right,
                    cfg,
                    sheet,
                    &format!("{tag}.r"),
                )?);
                if let (Some(l), Some(slb)) = (left, slb) {
                    slb_branches.push(add_mtj_path(&mut net, hub, slb, l, cfg, sheet, &format!("{tag}.l"))?);
                }
            }
            (Flavor::Gsh, left, slb) => {
                let hub = add_hub(&mut net, &t, cfg, sheet, &format!("{tag}.r"))?;
                sl_branches.push(add_mtj_path(
                    &mut net,
                    hub,
                    t.sl,
                    cell.right,
                    cfg,
                    sheet,
                    &format!("{tag}.r"),
                )?);
                if let (Some(l), Some(slb)) = (left, slb) {
                    let hub = add_hub(&mut net, &t, cfg, sheet, &format!("{tag}.l"))?;
                    slb_branches.push(add_mtj_path(&mut net, hub, slb, l, cfg, sheet, &format!("{tag}.l"))?);
                }
            }
        }
    }
    Ok(ReadNetwork { network: net, sl_branches, slb_branches })
}

pub fn build_read_network(cell: &CellMtjs, cfg: &DesignConfig, bias: &ReadBias) -> Result<ReadNetwork> {
    build_column_network(std::slice::from_ref(cell), cfg, bias)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensedCurrents {
    pub i_sl: f64,
    pub i_slb: Option<f64>,
}

/// Line currents into SL/SLB for the asserted cells of one column.
pub fn column_currents(cells: &[CellMtjs], cfg: &DesignConfig, bias: &ReadBias) -> Result<SensedCurrents> {
    let rn = build_column_network(cells, cfg, bias)?;
    let sol = solve_network(&rn.network)?;
    let sum = |ids: &[BranchId]| ids.iter().map(|&b| sol.currents[b]).sum::<f64>();
    Ok(SensedCurrents {
        i_sl: sum(&rn.sl_branches),
        i_slb: (!rn.slb_branches.is_empty()).then(|| sum(&rn.slb_branches)),
    })
}

pub fn sensed_currents(cell: &CellMtjs, cfg: &DesignConfig, bias: &ReadBias) -> Result<SensedCurrents> {
    column_currents(std::slice::from_ref(cell), cfg, bias)
}

/// SL current with MTJ_R in P and in AP, returned as (I_P, I_AP).
pub fn read_current_pair(cfg: &DesignConfig, bias: &ReadBias) -> Result<(f64, f64)> {
    let diff = cfg.design.is_differential();
    let p = sensed_currents(&CellMtjs::for_bit(false, diff), cfg, bias)?;
    let ap = sensed_currents(&CellMtjs::for_bit(true, diff), cfg, bias)?;
    Ok((p.i_sl, ap.i_sl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::defaults;
    use crate::design::Design;
    use approx::assert_relative_eq;

    fn bias() -> ReadBias {
        ReadBias::new(defaults::V_DD, defaults::V_READ).unwrap()
    }

    fn parallel(a: f64, b: f64) -> f64 {
        a * b / (a + b)
    }

    #[test]
    fn mtj_states() {
        let cfg = MtjConfig { r_p: 12e3, tmr: 1.0, area: 1.0 };
        assert_eq!(mtj_resistance(MtjState::P, &cfg), 12e3);
        assert_eq!(mtj_resistance(MtjState::Ap, &cfg), 24e3);
        let flat = MtjConfig { tmr: 0.0, ..cfg };
        assert_eq!(mtj_resistance(MtjState::P, &flat), mtj_resistance(MtjState::Ap, &flat));
        let pma = defaults::pma_magnet();
        let up = MagnetizationState::new(pma.easy_axis());
        assert_eq!(MtjState::of_magnetization(&up, &pma).unwrap(), MtjState::P);
        let tilted = MagnetizationState::new(crate::magnet::tilted_pole(&pma, -1.0));
        assert_eq!(MtjState::of_magnetization(&tilted, &pma).unwrap(), MtjState::Ap);
        let eq = MagnetizationState::new(pma.tilt_axis());
        assert!(matches!(MtjState::of_magnetization(&eq, &pma), Err(Error::NotReadable(_))));
    }

    #[test]
    fn topology() {
        let t = build_read_network(
            &CellMtjs::for_bit(false, false),
            &defaults::design_config(Design::Vsh),
            &bias(),
        )
        .unwrap();
        assert_eq!((t.sl_branches.len(), t.slb_branches.len()), (1, 0));
        let h = build_read_network(
            &CellMtjs::for_bit(false, true),
            &defaults::design_config(Design::Dvsh),
            &bias(),
        )
        .unwrap();
        assert_eq!((h.sl_branches.len(), h.slb_branches.len()), (1, 1));
        assert!(build_read_network(
            &CellMtjs::for_bit(false, true),
            &defaults::design_config(Design::Vsh),
            &bias()
        )
        .is_err());
    }

    // series-parallel reduction of the T network
    #[test]
    fn vsh_matches_series_reduction() {
        let cfg = defaults::design_config(Design::Vsh);
        let dev = &cfg.device;
        let sheet = on_state_sheet_resistance(dev, -defaults::V_DD).unwrap();
        let half = sheet * dev.gate_length / 2.0 / dev.channel_width;
        let arm = sheet * dev.arm_length / dev.arm_width;
        let hub = parallel(dev.contacts.source + half, dev.contacts.drain + half);
        for (bit, r_mtj) in [(false, cfg.mtj.r_p), (true, cfg.mtj.r_ap())] {
            let expect = defaults::V_READ / (hub + arm + dev.contacts.mtj_interface + r_mtj);
            let got = sensed_currents(&CellMtjs::for_bit(bit, false), &cfg, &bias()).unwrap();
            assert_relative_eq!(got.i_sl, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn dgsh_is_two_independent_strips() {
        let cfg = defaults::design_config(Design::Dgsh);
        let dev = &cfg.device;
        let half = dev.hm_sheet_resistance() * dev.hm_length / 2.0 / dev.hm_width;
        let hub = parallel(dev.contacts.source + half, dev.contacts.drain + half);
        let got = sensed_currents(&CellMtjs::for_bit(true, true), &cfg, &bias()).unwrap();
        let rs = hub + dev.contacts.mtj_interface;
        assert_relative_eq!(got.i_sl, defaults::V_READ / (rs + cfg.mtj.r_ap()), max_relative = 1e-12);
        assert_relative_eq!(got.i_slb.unwrap(), defaults::V_READ / (rs + cfg.mtj.r_p), max_relative = 1e-12);
    }

    #[test]
    fn ordering_symmetry_and_zero_bias() {
        for d in Design::ALL {
            let cfg = defaults::design_config(d);
            let (ip, iap) = read_current_pair(&cfg, &bias()).unwrap();
            assert!(ip > iap && iap > 0.0, "{d}");
            if d.is_differential() {
                let same = CellMtjs { right: MtjState::P, left: Some(MtjState::P) };
                let s = sensed_currents(&same, &cfg, &bias()).unwrap();
                assert_eq!(s.i_sl, s.i_slb.unwrap());
                let b0 = sensed_currents(&CellMtjs::for_bit(false, true), &cfg, &bias()).unwrap();
                assert!(b0.i_sl > b0.i_slb.unwrap());
            }
            let zero = ReadBias::new(defaults::V_DD, 0.0).unwrap();
            let s = sensed_currents(&CellMtjs::for_bit(false, d.is_differential()), &cfg, &zero).unwrap();
            assert_eq!(s.i_sl, 0.0);
        }
    }

    #[test]
    fn linear_in_read_voltage() {
        let cfg = defaults::design_config(Design::Dvsh);
        let (p0, a0) = read_current_pair(&cfg, &bias()).unwrap();
        for v in [0.1, 0.2, 0.3, 0.5, 0.6] {
            let (p, a) = read_current_pair(&cfg, &ReadBias::new(defaults::V_DD, v).unwrap()).unwrap();
            assert_relative_eq!(p, p0 * v / defaults::V_READ, max_relative = 1e-10);
            assert_relative_eq!(a, a0 * v / defaults::V_READ, max_relative = 1e-10);
        }
    }

    #[test]
    fn segment_doubling_converges() {
        for d in Design::ALL {
            let cfg = defaults::design_config(d);
            let fine = DesignConfig { segments: 2 * cfg.segments, ..cfg.clone() };
            let (p, a) = read_current_pair(&cfg, &bias()).unwrap();
            let (pf, af) = read_current_pair(&fine, &bias()).unwrap();
            assert!(((pf - p) / p).abs() < 5e-3 && ((af - a) / a).abs() < 5e-3);
        }
    }

    #[test]
    fn two_rows_add_on_the_line() {
        let cfg = defaults::design_config(Design::Dvsh);
        let (ip, iap) = read_current_pair(&cfg, &bias()).unwrap();
        let cells = [CellMtjs::for_bit(false, true), CellMtjs::for_bit(true, true)];
        let s = column_currents(&cells, &cfg, &bias()).unwrap();
        assert_relative_eq!(s.i_sl, ip + iap, max_relative = 1e-12);
        assert_relative_eq!(s.i_slb.unwrap(), ip + iap, max_relative = 1e-12);
    }

    #[test]
    fn off_channel_is_not_readable() {
        let cfg = defaults::design_config(Design::Vsh);
        let mut dev = cfg.device.clone();
        dev.threshold_voltage = -1.5;
        let cfg = DesignConfig { device: dev, ..cfg };
        let r = sensed_currents(&CellMtjs::for_bit(false, false), &cfg, &bias());
        assert!(matches!(r, Err(Error::NotReadable(_))));
    }
}
