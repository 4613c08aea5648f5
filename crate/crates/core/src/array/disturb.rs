use serde::{Deserialize, Serialize};

use super::memory::{AccessSet, MemoryArray, OpRecord};
use super::LineState;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DisturbViolation {
    /// Cell on neither an asserted row nor an accessed column saw a
    /// non-zero terminal voltage.
    Bias { op: usize, row: usize, col: usize, v_gs: f64, v_ds: f64 },
    /// Unaccessed cell conducted channel current.
    Current { op: usize, row: usize, col: usize, charge_current: f64 },
    /// Unaccessed cell magnetization changed.
    Magnetization { op: usize, row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbReport {
    pub ops_checked: usize,
    pub cells_checked: usize,
    /// Worst |V_GS| and |V_DS| seen by half-selected cells (asserted row or
    /// accessed column, not both).
    pub half_selected_max_v_gs: f64,
    pub half_selected_max_v_ds: f64,
    pub violations: Vec<DisturbViolation>,
}

impl DisturbReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays a logged sequence on a copy of `initial` and checks every cell
/// outside each access.
pub fn disturb_check(initial: &MemoryArray, log: &[OpRecord]) -> Result<DisturbReport> {
    let ops = log.iter().map(|rec| initial.lines_for(rec)).collect::<Result<Vec<_>>>()?;
    disturb_check_lines(initial, &ops)
}

/// As [`disturb_check`] but with explicit line voltages per operation.
pub fn disturb_check_lines(initial: &MemoryArray, ops: &[(LineState, AccessSet)]) -> Result<DisturbReport> {
    let mut array = initial.clone();
    let pulse = array.model().write_calibration()?.pulse_width;
    let (rows, cols) = (array.config().rows, array.config().cols);
    let mut report = DisturbReport {
        ops_checked: 0,
        cells_checked: 0,
        half_selected_max_v_gs: 0.0,
        half_selected_max_v_ds: 0.0,
        violations: Vec::new(),
    };
    for (op, (lines, access)) in ops.iter().enumerate() {
        let before = array.cells().to_vec();
        let events = array.apply_lines(lines, pulse)?;
        for ev in &events {
            if !access.contains(ev.row, ev.col) {
                report.violations.push(DisturbViolation::Current {
                    op,
                    row: ev.row,
                    col: ev.col,
                    charge_current: ev.charge_current,
                });
            }
        }
        for row in 0..rows {
            for col in 0..cols {
                if access.contains(row, col) {
                    continue;
                }
                report.cells_checked += 1;
                let b = lines.cell_bias(row, col);
                let on_row = access.rows.contains(&row);
                let on_col = access.cols.contains(&col);
                if on_row || on_col {
                    report.half_selected_max_v_gs = report.half_selected_max_v_gs.max(b.v_gs.abs());
                    report.half_selected_max_v_ds = report.half_selected_max_v_ds.max(b.v_ds.abs());
                } else if b.v_gs != 0.0 || b.v_ds != 0.0 {
                    report.violations.push(DisturbViolation::Bias {
                        op,
                        row,
                        col,
                        v_gs: b.v_gs,
                        v_ds: b.v_ds,
                    });
                }
                if array.cell(row, col) != &before[row * cols + col] {
                    report.violations.push(DisturbViolation::Magnetization { op, row, col });
                }
            }
        }
        report.ops_checked += 1;
    }
    Ok(report)
}
