//! Bit-cell array: WRITE/READ/HOLD/SLEEP bias protocol, word access,
//! two-row CiM access and disturb verification.
//!
//! Terminal mapping of a cell: the gate is on WL, the source terminal on BL
//! and the drain terminal on BLB. For the p-type channel
//! V_GS = V_WL − max(V_BL, V_BLB) and V_DS = V_BLB − V_BL.

mod disturb;
mod memory;

pub use disturb::{disturb_check, disturb_check_lines, DisturbReport, DisturbViolation};
pub use memory::{
    AccessSet, CellState, CimReadout, DualRowSense, MemoryArray, OpKind, OpRecord, ReadReport, WriteReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Largest array materialized cell by cell.
pub const MAX_MATERIALIZED_CELLS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Write,
    Read,
    Hold,
    Sleep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Write0,
    Write1,
    Read,
    Hold,
    Sleep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LineLevel {
    Driven(f64),
    /// High impedance, resting at the given precharge level.
    Floating(f64),
}

impl LineLevel {
    pub fn voltage(self) -> f64 {
        match self {
            LineLevel::Driven(v) | LineLevel::Floating(v) => v,
        }
    }

    pub fn is_floating(self) -> bool {
        matches!(self, LineLevel::Floating(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasVector {
    pub label: PhaseLabel,
    pub wl: LineLevel,
    pub bl: LineLevel,
    pub blb: LineLevel,
    pub sl: LineLevel,
    pub slb: LineLevel,
}

pub fn bias_for(phase: Phase, data_bit: Option<bool>, v_dd: f64, v_read: f64) -> Result<BiasVector> {
    use LineLevel::{Driven, Floating};
    let all = |label, v| BiasVector {
        label,
        wl: Driven(v),
        bl: Driven(v),
        blb: Driven(v),
        sl: Driven(v),
        slb: Driven(v),
    };
    Ok(match phase {
        Phase::Write => {
            let bit = data_bit.ok_or_else(|| Error::MissingArgument("WRITE needs a data bit".into()))?;
            let (label, bl, blb) =
                if bit { (PhaseLabel::Write1, v_dd, 0.0) } else { (PhaseLabel::Write0, 0.0, v_dd) };
            BiasVector {
                label,
                wl: Driven(0.0),
                bl: Driven(bl),
                blb: Driven(blb),
                sl: Floating(v_dd),
                slb: Floating(v_dd),
            }
        }
        Phase::Read => BiasVector {
            label: PhaseLabel::Read,
            wl: Driven(0.0),
            bl: Driven(v_dd),
            blb: Driven(v_dd),
            sl: Driven(v_dd - v_read),
            slb: Driven(v_dd - v_read),
        },
        Phase::Hold => all(PhaseLabel::Hold, v_dd),
        Phase::Sleep => all(PhaseLabel::Sleep, 0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub banks: usize,
    pub word_bits: usize,
    #[serde(rename = "v_dd_V")]
    pub v_dd: f64,
    #[serde(rename = "v_read_V")]
    pub v_read: f64,
    #[serde(rename = "line_capacitance_per_cell_F")]
    pub line_capacitance_per_cell: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            rows: 1024,
            cols: 1024,
            banks: 8,
            word_bits: 32,
            v_dd: 1.1,
            v_read: 0.4,
            line_capacitance_per_cell: 0.2e-15,
        }
    }
}

impl ArrayConfig {
    pub fn small(rows: usize, cols: usize, word_bits: usize) -> Self {
        Self { rows, cols, banks: 1, word_bits, ..Self::default() }
    }

    pub fn words_per_row(&self) -> usize {
        self.cols / self.word_bits
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("V_DD", self.v_dd)?;
        ensure_finite("V_READ", self.v_read)?;
        if self.rows == 0 || self.cols == 0 || self.banks == 0 {
            return Err(Error::InvalidInput("array dimensions must be positive".into()));
        }
        if self.word_bits == 0 || self.word_bits > 64 || !self.cols.is_multiple_of(self.word_bits) {
            return Err(Error::InvalidInput(format!(
                "word of {} bits does not tile {} columns",
                self.word_bits, self.cols
            )));
        }
        if !(self.v_dd > self.v_read && self.v_read > 0.0) {
            return Err(Error::InvalidInput("need V_DD > V_READ > 0".into()));
        }
        if !(self.line_capacitance_per_cell > 0.0) {
            return Err(Error::InvalidInput("line capacitance must be positive".into()));
        }
        Ok(())
    }

    pub fn word_mask(&self) -> u64 {
        if self.word_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.word_bits) - 1
        }
    }
}

/// Voltages of every line in the array during one operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineState {
    pub wl: Vec<LineLevel>,
    pub bl: Vec<LineLevel>,
    pub blb: Vec<LineLevel>,
    pub sl: Vec<LineLevel>,
    pub slb: Vec<LineLevel>,
}

impl LineState {
    /// Every line at the HOLD level.
    pub fn hold(rows: usize, cols: usize, v_dd: f64) -> Self {
        let h = LineLevel::Driven(v_dd);
        Self {
            wl: vec![h; rows],
            bl: vec![h; cols],
            blb: vec![h; cols],
            sl: vec![h; cols],
            slb: vec![h; cols],
        }
    }

    /// HOLD everywhere except the asserted rows and the accessed columns.
    pub fn for_access(
        rows: usize,
        cols: usize,
        v_dd: f64,
        asserted_rows: &[usize],
        columns: &[(usize, BiasVector)],
    ) -> Self {
        let mut s = Self::hold(rows, cols, v_dd);
        for &(c, b) in columns {
            s.bl[c] = b.bl;
            s.blb[c] = b.blb;
            s.sl[c] = b.sl;
            s.slb[c] = b.slb;
            for &r in asserted_rows {
                s.wl[r] = b.wl;
            }
        }
        s
    }

    pub fn cell_bias(&self, row: usize, col: usize) -> CellBias {
        let bl = self.bl[col].voltage();
        let blb = self.blb[col].voltage();
        CellBias { v_gs: self.wl[row].voltage() - bl.max(blb), v_ds: blb - bl }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellBias {
    pub v_gs: f64,
    pub v_ds: f64,
}
