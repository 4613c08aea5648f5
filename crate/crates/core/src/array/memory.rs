use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::{bias_for, ArrayConfig, LineState, Phase, MAX_MATERIALIZED_CELLS};
use crate::design::DesignModel;
use crate::error::{Error, Result};
use crate::magnet::{switching_time, tilted_pole, MagnetParams, MagnetizationState};
use crate::readpath::{column_currents, read_current_pair, CellMtjs, MtjState, ReadBias, SensedCurrents};
use crate::sensing::{rcsa_resolve, reference_current, ReferenceKind, SenseMode, SenseResult};
use crate::transport::{charge_current, injected_spin_current};

/// Timestamp slot for read and CiM accesses in the op log.
const ACCESS_SLOT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub mtj_r: MagnetizationState,
    pub mtj_l: Option<MagnetizationState>,
}

impl CellState {
    /// Settled state for a stored bit; bit-0 puts MTJ_R in P.
    pub fn for_bit(bit: bool, magnet: &MagnetParams, differential: bool) -> Self {
        let s = if bit { -1.0 } else { 1.0 };
        Self {
            mtj_r: MagnetizationState::new(tilted_pole(magnet, s)),
            mtj_l: differential.then(|| MagnetizationState::new(tilted_pole(magnet, -s))),
        }
    }

    pub fn bit(&self, magnet: &MagnetParams) -> bool {
        self.mtj_r.m.dot(&magnet.easy_axis()) < 0.0
    }

    pub fn mtjs(&self, magnet: &MagnetParams) -> Result<CellMtjs> {
        Ok(CellMtjs {
            right: MtjState::of_magnetization(&self.mtj_r, magnet)?,
            left: self.mtj_l.as_ref().map(|m| MtjState::of_magnetization(m, magnet)).transpose()?,
        })
    }

    /// m(MTJ_R) = −m(MTJ_L) along the easy axis, exactly.
    pub fn is_complementary(&self, magnet: &MagnetParams) -> bool {
        match &self.mtj_l {
            Some(l) => {
                let e = magnet.easy_axis();
                self.mtj_r.m.dot(&e) == -l.m.dot(&e)
            }
            None => true,
        }
    }

    fn hash_into<H: Hasher>(&self, h: &mut H) {
        for v in self.mtj_r.m.iter() {
            v.to_bits().hash(h);
        }
        if let Some(l) = &self.mtj_l {
            for v in l.m.iter() {
                v.to_bits().hash(h);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Write,
    Read,
    Cim,
}

/// One executed array operation, as written to the JSON-lines op log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpRecord {
    pub seq: u64,
    pub op: OpKind,
    pub rows: Vec<usize>,
    pub word: usize,
    pub data: Option<u64>,
    pub t_start_s: f64,
    pub t_end_s: f64,
}

/// Rows with an asserted word line and columns with driven bit lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AccessSet {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl AccessSet {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows.contains(&row) && self.cols.contains(&col)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WriteReport {
    pub row: usize,
    pub word: usize,
    /// Per column, LSB first; 0 when the cell already held the value.
    pub switching_times: Vec<f64>,
    pub write_time: f64,
    pub pulse_width: f64,
    pub charge_current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadReport {
    pub data: u64,
    pub min_margin: f64,
    pub results: Vec<SenseResult>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CimReadout {
    pub reference: f64,
    pub results: Vec<SenseResult>,
    pub line_currents: Vec<(f64, Option<f64>)>,
    pub warnings: Vec<String>,
}

/// Cell-level outcome of driving the array lines for one pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellEvent {
    pub row: usize,
    pub col: usize,
    pub charge_current: f64,
    /// Longest MTJ switching time in the cell; 0 when nothing had to switch.
    pub switching_time: f64,
    pub failed: bool,
}

/// A source of two-row sense results. The adder sees nothing else.
pub trait DualRowSense {
    fn word_bits(&self) -> usize;

    /// Per-column (AND on out1, NOR on out2) results, column 0 first.
    fn sense_and_nor(&mut self, row_x: usize, row_y: usize, word: usize) -> Result<Vec<SenseResult>>;
}

#[derive(Debug, Clone)]
pub struct MemoryArray {
    model: DesignModel,
    cfg: ArrayConfig,
    cells: Vec<CellState>,
    read_bias: ReadBias,
    /// Single-cell (I_P, I_AP) at the read bias, for reference generation.
    read_pair: (f64, f64),
    time: f64,
    log: Vec<OpRecord>,
    switch_cache: HashMap<u64, Option<f64>>,
    current_cache: HashMap<Vec<CellMtjs>, SensedCurrents>,
}

impl MemoryArray {
    /// A materialized array with every cell holding bit-0.
    pub fn new(model: DesignModel, cfg: ArrayConfig) -> Result<Self> {
        model.write_calibration()?;
        cfg.validate()?;
        model.config.validate()?;
        if cfg.rows.saturating_mul(cfg.cols) > MAX_MATERIALIZED_CELLS {
            return Err(Error::InvalidInput(format!(
                "{}x{} array exceeds the {MAX_MATERIALIZED_CELLS}-cell materialization limit",
                cfg.rows, cfg.cols
            )));
        }
        let read_bias = ReadBias::new(cfg.v_dd, cfg.v_read)?;
        let read_pair = read_current_pair(&model.config, &read_bias)?;
        let cell = CellState::for_bit(false, &model.config.magnet, model.design().is_differential());
        Ok(Self {
            cells: vec![cell; cfg.rows * cfg.cols],
            model,
            cfg,
            read_bias,
            read_pair,
            time: 0.0,
            log: Vec::new(),
            switch_cache: HashMap::new(),
            current_cache: HashMap::new(),
        })
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }

    pub fn model(&self) -> &DesignModel {
        &self.model
    }

    pub fn read_pair(&self) -> (f64, f64) {
        self.read_pair
    }

    pub fn cell(&self, row: usize, col: usize) -> &CellState {
        &self.cells[row * self.cfg.cols + col]
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn log(&self) -> &[OpRecord] {
        &self.log
    }

    pub fn clear_log(&mut self) {
        self.log.clear();
    }

    pub fn log_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.log {
            out.push_str(&serde_json::to_string(r).expect("op record serializes"));
            out.push('\n');
        }
        out
    }

    /// Hash over the exact bit patterns of every magnetization.
    pub fn state_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for c in &self.cells {
            c.hash_into(&mut h);
        }
        h.finish()
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row >= self.cfg.rows {
            return Err(Error::InvalidAccess(format!("row {row} out of range")));
        }
        Ok(())
    }

    fn word_columns(&self, word: usize) -> Result<std::ops::Range<usize>> {
        if word >= self.cfg.words_per_row() {
            return Err(Error::InvalidAccess(format!("word {word} out of range")));
        }
        let start = word * self.cfg.word_bits;
        Ok(start..start + self.cfg.word_bits)
    }

    /// Line voltages and access set of a logged operation.
    pub fn lines_for(&self, rec: &OpRecord) -> Result<(LineState, AccessSet)> {
        for &r in &rec.rows {
            self.check_row(r)?;
        }
        let cols: Vec<usize> = self.word_columns(rec.word)?.collect();
        let (v_dd, v_read) = (self.cfg.v_dd, self.cfg.v_read);
        let mut biases = Vec::with_capacity(cols.len());
        for (k, &c) in cols.iter().enumerate() {
            let b = match rec.op {
                OpKind::Write => {
                    let data =
                        rec.data.ok_or_else(|| Error::MissingArgument("write record without data".into()))?;
                    bias_for(Phase::Write, Some(data >> k & 1 == 1), v_dd, v_read)?
                }
                OpKind::Read | OpKind::Cim => bias_for(Phase::Read, None, v_dd, v_read)?,
            };
            biases.push((c, b));
        }
        let lines = LineState::for_access(self.cfg.rows, self.cfg.cols, v_dd, &rec.rows, &biases);
        Ok((lines, AccessSet { rows: rec.rows.clone(), cols }))
    }

    fn cached_switching_time(&mut self, spin: f64) -> Result<Option<f64>> {
        if let Some(&t) = self.switch_cache.get(&spin.to_bits()) {
            return Ok(t);
        }
        let t_max = self.model.write_calibration()?.pulse_width;
        let t = switching_time(&self.model.config.magnet, spin, t_max)?;
        self.switch_cache.insert(spin.to_bits(), t);
        Ok(t)
    }

    /// Drives every cell with the given line voltages for one pulse. Cells
    /// whose channel carries no charge current are left untouched.
    pub(crate) fn apply_lines(&mut self, lines: &LineState, pulse: f64) -> Result<Vec<CellEvent>> {
        let dev = self.model.config.device.clone();
        let magnet = self.model.config.magnet.clone();
        let easy = magnet.easy_axis();
        let mut events = Vec::new();
        for row in 0..self.cfg.rows {
            for col in 0..self.cfg.cols {
                let b = lines.cell_bias(row, col);
                let i_c = charge_current(&dev, b.v_gs, b.v_ds)?;
                if i_c == 0.0 {
                    continue;
                }
                let spin = injected_spin_current(&dev, i_c)?;
                let t = self.cached_switching_time(spin.magnitude)?;
                let target = spin.polarization.sign();
                let cell = &mut self.cells[row * self.cfg.cols + col];
                let mut ev = CellEvent { row, col, charge_current: i_c, switching_time: 0.0, failed: false };
                let mtjs = [Some(&mut cell.mtj_r), cell.mtj_l.as_mut()];
                for (k, slot) in mtjs.into_iter().enumerate() {
                    let Some(m) = slot else { continue };
                    let want = if k == 0 { target } else { -target };
                    if m.m.dot(&easy).signum() == want {
                        continue;
                    }
                    match t {
                        Some(ts) if ts <= pulse => {
                            *m = MagnetizationState::new(tilted_pole(&magnet, want));
                            ev.switching_time = ev.switching_time.max(ts);
                        }
                        _ => ev.failed = true,
                    }
                }
                events.push(ev);
            }
        }
        Ok(events)
    }

    fn record(&mut self, op: OpKind, rows: Vec<usize>, word: usize, data: Option<u64>, dt: f64) {
        let seq = self.log.len() as u64;
        self.log.push(OpRecord { seq, op, rows, word, data, t_start_s: self.time, t_end_s: self.time + dt });
        self.time += dt;
    }

    pub fn write_word(&mut self, row: usize, word: usize, data: u64) -> Result<WriteReport> {
        self.check_row(row)?;
        let cols = self.word_columns(word)?;
        if data & !self.cfg.word_mask() != 0 {
            return Err(Error::InvalidInput(format!("data {data:#x} wider than the word")));
        }
        let cal = *self.model.write_calibration()?;
        let rec = OpRecord {
            seq: 0,
            op: OpKind::Write,
            rows: vec![row],
            word,
            data: Some(data),
            t_start_s: 0.0,
            t_end_s: 0.0,
        };
        let (lines, _) = self.lines_for(&rec)?;
        let events = self.apply_lines(&lines, cal.pulse_width)?;
        let mut times = vec![0.0; cols.len()];
        let mut failed = Vec::new();
        for ev in events.iter().filter(|e| e.row == row && cols.contains(&e.col)) {
            times[ev.col - cols.start] = ev.switching_time;
            if ev.failed {
                failed.push(ev.col);
            }
        }
        self.record(OpKind::Write, vec![row], word, Some(data), cal.pulse_width);
        if !failed.is_empty() {
            return Err(Error::WriteFailure { row, columns: failed });
        }
        let write_time = times.iter().cloned().fold(0.0, f64::max);
        Ok(WriteReport {
            row,
            word,
            switching_times: times,
            write_time,
            pulse_width: cal.pulse_width,
            charge_current: cal.charge_current,
        })
    }

    fn line_currents(&mut self, cells: Vec<CellMtjs>) -> Result<SensedCurrents> {
        if let Some(c) = self.current_cache.get(&cells) {
            return Ok(*c);
        }
        let c = column_currents(&cells, &self.model.config, &self.read_bias)?;
        self.current_cache.insert(cells, c);
        Ok(c)
    }

    /// Drives the read bias through the engine; no channel current flows,
    /// so no magnetization can move.
    fn drive_read(&mut self, rows: &[usize], word: usize) -> Result<()> {
        let rec = OpRecord {
            seq: 0,
            op: OpKind::Read,
            rows: rows.to_vec(),
            word,
            data: None,
            t_start_s: 0.0,
            t_end_s: 0.0,
        };
        let (lines, _) = self.lines_for(&rec)?;
        let events = self.apply_lines(&lines, ACCESS_SLOT)?;
        debug_assert!(events.is_empty());
        Ok(())
    }

    pub fn read_word(&mut self, row: usize, word: usize) -> Result<ReadReport> {
        self.check_row(row)?;
        let cols = self.word_columns(word)?;
        self.drive_read(&[row], word)?;
        let magnet = self.model.config.magnet.clone();
        let differential = self.model.design().is_differential();
        let (i_p, i_ap) = self.read_pair;
        // an ideal reference cell; degenerate TMR puts it on both currents
        let i_ref = reference_current(ReferenceKind::Read, i_p, i_ap).unwrap_or((i_p + i_ap) / 2.0);
        let mut data = 0u64;
        let mut results = Vec::with_capacity(cols.len());
        let mut warnings = Vec::new();
        for (k, c) in cols.clone().enumerate() {
            let mtjs = self.cell(row, c).mtjs(&magnet)?;
            let cur = self.line_currents(vec![mtjs])?;
            let r = if differential {
                rcsa_resolve(cur.i_sl, cur.i_slb, SenseMode::Differential, None)?
            } else {
                rcsa_resolve(cur.i_sl, None, SenseMode::SingleEnded, Some(i_ref))?
            };
            if r.out1 {
                data |= 1 << k;
            }
            if r.marginal {
                warnings.push(format!("column {c}: marginal sense margin {:.3e} A", r.margin));
            }
            results.push(r);
        }
        self.record(OpKind::Read, vec![row], word, None, ACCESS_SLOT);
        let min_margin = results.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        Ok(ReadReport { data, min_margin, results, warnings })
    }

    /// Asserts two word lines at once and senses every column of the word
    /// single-ended against a two-row CiM reference.
    pub fn cim_access(
        &mut self,
        row_x: usize,
        row_y: usize,
        word: usize,
        kind: ReferenceKind,
    ) -> Result<CimReadout> {
        self.check_row(row_x)?;
        self.check_row(row_y)?;
        if row_x == row_y {
            return Err(Error::InvalidAccess(format!("row {row_x} asserted twice")));
        }
        if kind == ReferenceKind::Read {
            return Err(Error::InvalidAccess("CiM access needs an AND or OR reference".into()));
        }
        let cols = self.word_columns(word)?;
        self.drive_read(&[row_x, row_y], word)?;
        let (i_p, i_ap) = self.read_pair;
        let i_ref = reference_current(kind, i_p, i_ap)?;
        let magnet = self.model.config.magnet.clone();
        let mut results = Vec::with_capacity(cols.len());
        let mut line_currents = Vec::with_capacity(cols.len());
        let mut warnings = Vec::new();
        for c in cols {
            let pair = vec![self.cell(row_x, c).mtjs(&magnet)?, self.cell(row_y, c).mtjs(&magnet)?];
            let cur = self.line_currents(pair)?;
            let r = rcsa_resolve(cur.i_sl, cur.i_slb, SenseMode::SingleEnded, Some(i_ref))?;
            if r.marginal {
                warnings.push(format!("column {c}: marginal sense margin {:.3e} A", r.margin));
            }
            line_currents.push((cur.i_sl, cur.i_slb));
            results.push(r);
        }
        self.record(OpKind::Cim, vec![row_x, row_y], word, None, ACCESS_SLOT);
        Ok(CimReadout { reference: i_ref, results, line_currents, warnings })
    }

    /// One row per line, one 0/1 character per cell.
    pub fn export_text(&self) -> String {
        let magnet = &self.model.config.magnet;
        let mut out = String::with_capacity(self.cells.len() + self.cfg.rows);
        for row in self.cells.chunks(self.cfg.cols) {
            for c in row {
                out.push(if c.bit(magnet) { '1' } else { '0' });
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn import_text(&mut self, text: &str) -> Result<()> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != self.cfg.rows {
            return Err(Error::InvalidInput(format!(
                "expected {} rows, found {}",
                self.cfg.rows,
                lines.len()
            )));
        }
        let magnet = self.model.config.magnet.clone();
        let diff = self.model.design().is_differential();
        let mut cells = Vec::with_capacity(self.cells.len());
        for (r, line) in lines.iter().enumerate() {
            let line = line.trim();
            if line.chars().count() != self.cfg.cols {
                return Err(Error::InvalidInput(format!("row {r} has the wrong width")));
            }
            for ch in line.chars() {
                let bit = match ch {
                    '0' => false,
                    '1' => true,
                    other => return Err(Error::InvalidInput(format!("row {r}: bad cell '{other}'"))),
                };
                cells.push(CellState::for_bit(bit, &magnet, diff));
            }
        }
        self.cells = cells;
        Ok(())
    }
}

impl DualRowSense for MemoryArray {
    fn word_bits(&self) -> usize {
        self.cfg.word_bits
    }

    /// Differential cells give AND on SL and NOR on SLB in one access.
    /// Single-ended cells take an AND access and an OR access.
    fn sense_and_nor(&mut self, row_x: usize, row_y: usize, word: usize) -> Result<Vec<SenseResult>> {
        let and = self.cim_access(row_x, row_y, word, ReferenceKind::CimAnd)?.results;
        if self.model.design().is_differential() {
            return Ok(and);
        }
        let or = self.cim_access(row_x, row_y, word, ReferenceKind::CimOr)?.results;
        Ok(and
            .into_iter()
            .zip(or)
            .map(|(a, o)| SenseResult {
                out1: a.out1,
                out2: Some(!o.out1),
                margin: a.margin.min(o.margin),
                marginal: a.marginal || o.marginal,
            })
            .collect())
    }
}
