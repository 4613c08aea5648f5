#![allow(non_snake_case)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vshmem::array::{ArrayConfig, MemoryArray};
use vshmem::cim::{add_words, derive_logics};
use vshmem::config::RunConfig;
use vshmem::design::{CalibratedSet, SWITCHING_HORIZON};
use vshmem::magnet::DriveCalibration;
use vshmem::metrics::{compare_designs, ReadPolicy};
use vshmem::metrics::{evaluate_trace, ExecutionMode, TraceEnergy, WorkloadTrace};
use vshmem::metrics::{iso_sense_margin_search, switching_sweep, EnergyContext};
use vshmem::sensing::{ReferenceKind, SM_MIN};
use vshmem::transport::{fit_spin_flip_length, fit_tlm, FitResult};
use vshmem::{Design, DesignModel};

use crate::output::{ensure_dir, sci, write_csv, write_json};
use crate::{CliError, CliResult, FitKind, ReadPolicyArg};

fn calibrate(cfg: &RunConfig, designs: &[Design]) -> CliResult<CalibratedSet> {
    let set = cfg.calibrate_designs(designs)?;
    if let Some(worst) = set.drive.residuals.iter().map(|r| r.abs()).reduce(f64::max) {
        eprintln!(
            "calibration: k_I = {:.6e} A/V^2, alpha = {:.6}, worst anchor residual {:.2}%",
            set.drive.transconductance,
            set.drive.damping,
            100.0 * worst
        );
    }
    Ok(set)
}

fn small_array(cfg: &RunConfig, rows: usize, word_bits: usize) -> ArrayConfig {
    ArrayConfig {
        v_dd: cfg.array.v_dd,
        v_read: cfg.array.v_read,
        line_capacitance_per_cell: cfg.array.line_capacitance_per_cell,
        ..ArrayConfig::small(rows, word_bits, word_bits)
    }
}

fn v_read_for(model: &DesignModel, cfg: &RunConfig, policy: ReadPolicyArg) -> CliResult<f64> {
    Ok(match policy {
        ReadPolicyArg::Fixed => cfg.array.v_read,
        ReadPolicyArg::IsoSm => iso_sense_margin_search(model, cfg.array.v_dd, SM_MIN)?,
    })
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    drive: &'a DriveCalibration,
    designs: Vec<&'a DesignModel>,
    v_gs_V: Vec<f64>,
}

pub fn sweep_switching(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let points = cfg.sweep.points().map_err(|e| CliError::Usage(e.to_string()))?;
    let set = calibrate(cfg, &cfg.designs)?;
    let mut rows = Vec::new();
    for m in &set.designs {
        let dev = &m.config.device;
        let sweep = switching_sweep(dev, &m.config.magnet, &points, cfg.array.v_dd, SWITCHING_HORIZON)?;
        println!("{}:", m.design());
        for (v, t) in sweep {
            let cell = t.map(sci).unwrap_or_default();
            match t {
                Some(t) => println!("  V_GS = {v:+.3} V  t_switch = {:.3} ns", t * 1e9),
                None => println!("  V_GS = {v:+.3} V  no switching within {:.0} ns", SWITCHING_HORIZON * 1e9),
            }
            rows.push(vec![m.design().to_string(), format!("{v:.6}"), cell]);
        }
    }
    ensure_dir(out)?;
    write_csv(&out.join("sweep_switching.csv"), &["design", "v_gs_V", "t_switch_s"], &rows)?;
    let sidecar = SweepSidecar { drive: &set.drive, designs: set.designs.iter().collect(), v_gs_V: points };
    write_json(&out.join("sweep_switching.json"), &sidecar)?;
    Ok(())
}

const TRUTH_OPS: [&str; 6] = ["and", "nor", "nand", "or", "xor", "xnor"];

fn boolean(op: &str, a: bool, b: bool) -> bool {
    match op {
        "and" => a && b,
        "nor" => !(a || b),
        "nand" => !(a && b),
        "or" => a || b,
        "xor" => a ^ b,
        _ => !(a ^ b),
    }
}

#[derive(Serialize)]
struct TruthEntry {
    op: &'static str,
    a: bool,
    b: bool,
    expected: bool,
    sensed: bool,
    margin_A: f64,
    marginal: bool,
}

#[derive(Serialize)]
struct TruthSidecar {
    design: Design,
    v_read_V: f64,
    reference_A: f64,
    line_currents_A: Vec<(f64, Option<f64>)>,
    mismatches: usize,
    entries: Vec<TruthEntry>,
}

pub fn truth_tables(cfg: &RunConfig, explicit: Option<Design>, out: &Path) -> CliResult<()> {
    let design = match explicit {
        Some(d) => d,
        None => *cfg
            .designs
            .iter()
            .find(|d| d.is_differential())
            .ok_or_else(|| CliError::Usage("truth tables need a differential design".into()))?,
    };
    if !design.is_differential() {
        return Err(CliError::Usage(format!(
            "{design} is single-ended; truth tables need a differential design"
        )));
    }
    let set = calibrate(cfg, &[design])?;
    let model = set.designs[0].clone();
    let mut array = MemoryArray::new(model, small_array(cfg, 2, 4))?;
    // column k holds the operand pair (k >> 1, k & 1)
    array.write_word(0, 0, 0b1100)?;
    array.write_word(1, 0, 0b1010)?;
    let readout = array.cim_access(0, 1, 0, ReferenceKind::CimAnd)?;

    let mut entries = Vec::new();
    for op in TRUTH_OPS {
        for (k, r) in readout.results.iter().enumerate() {
            let (a, b) = (k >> 1 & 1 == 1, k & 1 == 1);
            let out2 = r.out2.ok_or(vshmem::Error::InconsistentSense { column: k })?;
            let c = derive_logics(r.out1, out2)?;
            let sensed = match op {
                "and" => c.and_,
                "nor" => c.nor_,
                "nand" => c.nand_,
                "or" => c.or_,
                "xor" => c.xor_,
                _ => c.xnor_,
            };
            entries.push(TruthEntry {
                op,
                a,
                b,
                expected: boolean(op, a, b),
                sensed,
                margin_A: r.margin,
                marginal: r.marginal,
            });
        }
    }
    let mismatches = entries.iter().filter(|e| e.expected != e.sensed).count();

    println!("{design} truth tables (reference {:.3} uA)", readout.reference * 1e6);
    for op in TRUTH_OPS {
        let cells: Vec<String> = entries
            .iter()
            .filter(|e| e.op == op)
            .map(|e| {
                let flag = if e.marginal { "*" } else { "" };
                format!("{}{}->{}{flag}", e.a as u8, e.b as u8, e.sensed as u8)
            })
            .collect();
        println!("  {op:>4}: {}", cells.join("  "));
    }
    for w in &readout.warnings {
        println!("  warning: {w}");
    }

    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.op.to_string(),
                (e.a as u8).to_string(),
                (e.b as u8).to_string(),
                (e.expected as u8).to_string(),
                (e.sensed as u8).to_string(),
                sci(e.margin_A),
                e.marginal.to_string(),
            ]
        })
        .collect();
    ensure_dir(out)?;
    write_csv(
        &out.join("truth_tables.csv"),
        &["op", "a", "b", "expected", "sensed", "margin_A", "marginal"],
        &rows,
    )?;
    let sidecar = TruthSidecar {
        design,
        v_read_V: cfg.array.v_read,
        reference_A: readout.reference,
        line_currents_A: readout.line_currents,
        mismatches,
        entries,
    };
    write_json(&out.join("truth_tables.json"), &sidecar)?;
    if mismatches > 0 {
        return Err(CliError::Verification(format!("{mismatches} truth-table entries deviate")));
    }
    Ok(())
}

pub fn compare(cfg: &RunConfig, policy: ReadPolicyArg, out: &Path) -> CliResult<()> {
    let set = calibrate(cfg, &cfg.designs)?;
    let policy = match policy {
        ReadPolicyArg::Fixed => ReadPolicy::Fixed,
        ReadPolicyArg::IsoSm => ReadPolicy::IsoSenseMargin(SM_MIN),
    };
    let table = compare_designs(&set.designs, &cfg.array, &cfg.energy, policy)?;
    println!("{:<6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}", "design", "vs", "V_READ", "WT", "WE", "RE", "area");
    for r in &table.rows {
        println!(
            "{:<6} {:>8} {:>8.3}V {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            r.design.to_string(),
            r.baseline.to_string(),
            r.v_read,
            r.norm_write_time,
            r.norm_write_energy,
            r.norm_read_energy,
            r.norm_area
        );
    }
    ensure_dir(out)?;
    std::fs::write(out.join("comparison.csv"), table.to_csv())?;
    write_json(&out.join("comparison.json"), &table)?;
    Ok(())
}

fn read_points(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        if rec.len() != 2 {
            return Err(CliError::Usage(format!("line {}: expected two columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push((x, y)),
            _ if i == 0 => continue,
            _ => return Err(CliError::Usage(format!("line {}: not numeric", i + 1))),
        }
    }
    Ok(points)
}

#[derive(Serialize)]
struct FitSidecar {
    kind: &'static str,
    points: Vec<(f64, f64)>,
    result: FitResult,
}

pub fn fit(csv_path: &Path, kind: FitKind, width_um: Option<f64>, out: &Path) -> CliResult<()> {
    let points: Vec<(f64, f64)> = read_points(csv_path)?.into_iter().map(|(l, r)| (l * 1e-6, r)).collect();
    let usage = |e: vshmem::Error| CliError::Usage(e.to_string());
    let (name, result, rows) = match kind {
        FitKind::SpinFlip => {
            let r = fit_spin_flip_length(&points).map_err(usage)?;
            println!("lambda_S = {:.3} nm", r.fitted_value * 1e9);
            println!("R_0 = {:.6} ohm", r.intercept);
            let rows = vec![
                vec!["lambda_S_m".to_string(), sci(r.fitted_value)],
                vec!["r0_ohm".to_string(), sci(r.intercept)],
                vec!["residual_rms_ln_ohm".to_string(), sci(r.residual_rms)],
            ];
            ("spin-flip", r, rows)
        }
        FitKind::Tlm => {
            let w = width_um.ok_or_else(|| CliError::Usage("TLM fit needs --width-um".into()))?;
            let r = fit_tlm(&points, w * 1e-6).map_err(usage)?;
            println!("rho_sheet = {:.3} ohm/sq", r.fitted_value);
            println!("R_C = {:.3} ohm", r.contact_resistance());
            let rows = vec![
                vec!["sheet_resistance_ohm_sq".to_string(), sci(r.fitted_value)],
                vec!["contact_resistance_ohm".to_string(), sci(r.contact_resistance())],
                vec!["residual_rms_ohm".to_string(), sci(r.residual_rms)],
            ];
            ("tlm", r, rows)
        }
    };
    ensure_dir(out)?;
    write_csv(&out.join("fit.csv"), &["quantity", "value"], &rows)?;
    write_json(&out.join("fit.json"), &FitSidecar { kind: name, points, result })?;
    Ok(())
}

fn load_traces(path: &Path) -> CliResult<Vec<WorkloadTrace>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("trace {}: {e}", path.display()));
    if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(bad)
    } else {
        Ok(vec![serde_json::from_str(&text).map_err(bad)?])
    }
}

#[derive(Serialize)]
struct TraceRow {
    design: Design,
    v_read_V: f64,
    cim: TraceEnergy,
    nmc: TraceEnergy,
}

pub fn trace(cfg: &RunConfig, path: &Path, policy: ReadPolicyArg, out: &Path) -> CliResult<()> {
    let traces = load_traces(path)?;
    let set = calibrate(cfg, &cfg.designs)?;
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for m in &set.designs {
        let v_read = v_read_for(m, cfg, policy)?;
        let ctx = EnergyContext { array: &cfg.array, params: &cfg.energy, v_read };
        for t in &traces {
            let cim = evaluate_trace(t, m, ExecutionMode::Cim, &ctx)?;
            let nmc = evaluate_trace(t, m, ExecutionMode::Nmc, &ctx)?;
            println!(
                "{:<12} {:<5} CiM {:.4e} J  NMC {:.4e} J  saving {:.2}x",
                t.label,
                m.design().to_string(),
                cim.total,
                nmc.total,
                nmc.total / cim.total
            );
            for e in [&cim, &nmc] {
                let mode = match e.mode {
                    ExecutionMode::Cim => "cim",
                    ExecutionMode::Nmc => "nmc",
                };
                let mut row =
                    vec![t.label.clone(), m.design().to_string(), mode.into(), format!("{v_read:.6}")];
                row.extend(e.breakdown.iter().map(|(_, v)| sci(*v)));
                row.push(sci(e.total));
                rows.push(row);
            }
            results.push(TraceRow { design: m.design(), v_read_V: v_read, cim, nmc });
        }
    }
    let mut header = vec!["label", "design", "mode", "v_read_V"];
    if let Some(first) = results.first() {
        header.extend(first.cim.breakdown.iter().map(|(k, _)| k.as_str()));
    }
    header.push("total");
    let header: Vec<String> = header
        .iter()
        .map(|h| match *h {
            "label" | "design" | "mode" | "v_read_V" => h.to_string(),
            other => format!("{other}_J"),
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    ensure_dir(out)?;
    write_csv(&out.join("trace.csv"), &header, &rows)?;
    write_json(&out.join("trace.json"), &results)?;
    Ok(())
}

fn parse_word(s: &str, mask: u64) -> CliResult<u64> {
    let clean = s.replace('_', "");
    let v = match clean.strip_prefix("0x").or_else(|| clean.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => clean.parse(),
    }
    .map_err(|_| CliError::Usage(format!("'{s}' is not a number")))?;
    if v & !mask != 0 {
        return Err(CliError::Usage(format!("'{s}' does not fit the word")));
    }
    Ok(v)
}

#[derive(Serialize)]
struct AddEntry {
    x: u64,
    y: u64,
    cin: bool,
    sum: u64,
    carry_out: bool,
    expected_sum: u64,
    expected_carry_out: bool,
}

#[derive(Serialize)]
struct AddSidecar {
    design: Design,
    word_bits: usize,
    seed: u64,
    mismatches: usize,
    additions: Vec<AddEntry>,
}

pub fn add_demo(
    cfg: &RunConfig,
    explicit: Option<Design>,
    words: &[String],
    count: usize,
    cin: bool,
    out: &Path,
) -> CliResult<()> {
    let design = explicit.unwrap_or(Design::Dvsh);
    let bits = cfg.array.word_bits;
    let arr_cfg = small_array(cfg, 2, bits);
    arr_cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let mask = arr_cfg.word_mask();
    let pairs: Vec<(u64, u64)> = match words {
        [] => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..count).map(|_| (rng.gen::<u64>() & mask, rng.gen::<u64>() & mask)).collect()
        }
        [x, y] => vec![(parse_word(x, mask)?, parse_word(y, mask)?)],
        _ => return Err(CliError::Usage("add-demo takes two operands or none".into())),
    };
    let set = calibrate(cfg, &[design])?;
    let mut array = MemoryArray::new(set.designs[0].clone(), arr_cfg)?;
    let width = bits.div_ceil(4);
    let mut additions = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        array.write_word(0, 0, x)?;
        array.write_word(1, 0, y)?;
        let r = add_words(&mut array, 0, 1, 0, cin)?;
        let full = x as u128 + y as u128 + cin as u128;
        let expected_sum = (full as u64) & mask;
        let expected_carry_out = full >> bits != 0;
        println!(
            "{x:#0w$x} + {y:#0w$x} + {} = sum {:#x}, carry {}",
            cin as u8,
            r.sum,
            r.carry_out as u8,
            w = width + 2
        );
        additions.push(AddEntry {
            x,
            y,
            cin,
            sum: r.sum,
            carry_out: r.carry_out,
            expected_sum,
            expected_carry_out,
        });
    }
    let mismatches =
        additions.iter().filter(|a| a.sum != a.expected_sum || a.carry_out != a.expected_carry_out).count();
    let hex = |v: u64| format!("{v:#0w$x}", w = width + 2);
    let rows: Vec<Vec<String>> = additions
        .iter()
        .map(|a| {
            vec![
                hex(a.x),
                hex(a.y),
                (a.cin as u8).to_string(),
                hex(a.sum),
                (a.carry_out as u8).to_string(),
                hex(a.expected_sum),
                (a.expected_carry_out as u8).to_string(),
            ]
        })
        .collect();
    ensure_dir(out)?;
    write_csv(
        &out.join("add_demo.csv"),
        &["x", "y", "cin", "sum", "carry_out", "expected_sum", "expected_carry_out"],
        &rows,
    )?;
    write_json(
        &out.join("add_demo.json"),
        &AddSidecar { design, word_bits: bits, seed: cfg.seed, mismatches, additions },
    )?;
    if mismatches > 0 {
        return Err(CliError::Verification(format!("{mismatches} additions deviate from the integer sum")));
    }
    Ok(())
}
