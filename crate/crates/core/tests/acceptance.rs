//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set `VSHMEM_BLESS=1` to rewrite the frozen comparison fixture.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vshmem::array::{disturb_check, ArrayConfig, MemoryArray};
use vshmem::cim::{add_words, derive_logics};
use vshmem::config::defaults;
use vshmem::design::{CalibratedSet, SWITCHING_HORIZON};
use vshmem::magnet::{
    calibrate_drive, llgs_integrate, magnetic_energy, switching_time, thermal_stability, tilted_pole,
    write_spin_current, MagnetParams, MagnetizationState, SpinTorque, DEFAULT_STEP,
};
use vshmem::metrics::{compare_designs, sense_margin, ComparisonTable, ReadPolicy};
use vshmem::readpath::{build_column_network, solve_network, CellMtjs, ReadBias};
use vshmem::sensing::{rcsa_resolve, reference_current, ReferenceKind, SenseMode, SM_MIN};
use vshmem::transport::{fit_spin_flip_length, vsh_spin_current};
use vshmem::units::a_per_m_to_oe;
use vshmem::Design;

const RATIO_TOL_ULPS: f64 = 4.0;
const DELTA_TOL_KBT: f64 = 0.5;
const HK_REL_TOL: f64 = 0.02;
const ANCHOR_REL_TOL: f64 = 0.10;
const SWEEP_POINTS: usize = 21;
const FIT_EXACT_REL_TOL: f64 = 1e-9;
const FIT_NOISE: f64 = 0.05;
const FIT_NOISY_REL_TOL: f64 = 0.10;
const FIT_TRIALS: u64 = 100;
const ADD_RANDOM_TRIALS: usize = 10_000;
const ADD_TIME_LIMIT_S: f64 = 10.0;
const MARGIN_EXACT_ULPS: f64 = 4.0;
const SM_LINEAR_TOL: f64 = 0.01;
const DISTURB_OPS: usize = 1000;
const FIXTURE_REL_TOL: f64 = 1e-6;
const NODE_BALANCE_TOL: f64 = 1e-12;
const NORM_DRIFT_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_ulps(a: f64, b: f64, ulps: f64) -> bool {
    within_ulps_of(a, b, ulps, a.abs().max(b.abs()))
}

/// Rounding-level agreement measured against `scale`, the magnitude of the
/// operands the compared quantities were computed from.
fn within_ulps_of(a: f64, b: f64, ulps: f64, scale: f64) -> bool {
    (a - b).abs() <= ulps * f64::EPSILON * scale
}

fn calibrated() -> CalibratedSet {
    defaults::calibrated_designs().expect("default calibration converges")
}

fn c1_spin_injection() -> Outcome {
    let dev = defaults::vsh_device();
    let i_c = 100e-6;
    let ratio = vsh_spin_current(i_c, &dev).unwrap().right.magnitude / i_c;
    let pass = dev.mtj_diameter == 30e-9
        && dev.gate_length == 45e-9
        && dev.spin_hall_angle == 1.0
        && within_ulps(ratio, 2.0 / 3.0, RATIO_TOL_ULPS);
    outcome(pass, format!("I_S/I_C = {ratio:.15} (2/3 within {RATIO_TOL_ULPS} ulp)"))
}

fn c2_thermal_stability() -> Outcome {
    let pma = thermal_stability(&defaults::pma_magnet());
    let ima = thermal_stability(&defaults::ima_magnet());
    let pass = (pma - 53.3).abs() <= DELTA_TOL_KBT
        && (ima - 50.2).abs() <= DELTA_TOL_KBT
        && pma > 50.0
        && ima > 50.0;
    outcome(pass, format!("PMA {pma:.2} kBT (53.3), IMA {ima:.2} kBT (50.2), tol ±{DELTA_TOL_KBT}"))
}

fn c3_anisotropy_field() -> Outcome {
    let pma = a_per_m_to_oe(defaults::pma_magnet().anisotropy_field());
    let ima = a_per_m_to_oe(defaults::ima_magnet().anisotropy_field());
    let e_p = (pma / 3900.0 - 1.0).abs();
    let e_i = (ima / 1330.0 - 1.0).abs();
    outcome(
        e_p <= HK_REL_TOL && e_i <= HK_REL_TOL,
        format!(
            "PMA {pma:.0} Oe ({:+.2}%), IMA {ima:.0} Oe ({:+.2}%), tol {:.0}%",
            100.0 * (pma / 3900.0 - 1.0),
            100.0 * (ima / 1330.0 - 1.0),
            100.0 * HK_REL_TOL
        ),
    )
}

fn c4_switching_calibration() -> Outcome {
    let mut dev = defaults::vsh_device();
    let mut magnet = defaults::pma_magnet();
    let drive = match calibrate_drive(&defaults::switching_anchors(), &dev, &magnet) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("calibration error: {e}")),
    };
    drive.apply(&mut dev, &mut magnet);
    let t_at = |v: f64| {
        let i_s = write_spin_current(&dev, v, defaults::V_DD).unwrap();
        switching_time(&magnet, i_s, SWITCHING_HORIZON).unwrap()
    };
    let (Some(t10), Some(t12)) = (t_at(-1.0), t_at(-1.2)) else {
        return outcome(false, "an anchor bias never switches");
    };
    let e10 = t10 / 3.2e-9 - 1.0;
    let e12 = t12 / 1.5e-9 - 1.0;
    let sweep: Vec<Option<f64>> =
        (0..SWEEP_POINTS).map(|k| t_at(-1.2 + 0.2 * k as f64 / (SWEEP_POINTS - 1) as f64)).collect();
    // towards -1.0 V the drive weakens, so t_switch must fall with |V_GS|
    let monotone =
        sweep.iter().all(Option::is_some) && sweep.windows(2).all(|w| w[1].unwrap() > w[0].unwrap());
    outcome(
        e10.abs() <= ANCHOR_REL_TOL && e12.abs() <= ANCHOR_REL_TOL && monotone,
        format!(
            "t(-1.0 V) = {:.3} ns ({:+.2}%), t(-1.2 V) = {:.3} ns ({:+.2}%), tol {:.0}%; \
             {SWEEP_POINTS}-point sweep monotone: {monotone}",
            t10 * 1e9,
            100.0 * e10,
            t12 * 1e9,
            100.0 * e12,
            100.0 * ANCHOR_REL_TOL
        ),
    )
}

fn rnl(lengths: &[f64], lambda: f64) -> Vec<(f64, f64)> {
    lengths.iter().map(|&l| (l, 75.0 * (-l / lambda).exp())).collect()
}

fn c5_spin_flip_fit() -> Outcome {
    let lengths = [2e-6, 3e-6, 5e-6];
    let lambda = 550e-9;
    let exact = fit_spin_flip_length(&rnl(&lengths, lambda)).unwrap().fitted_value;
    let exact_err = (exact / lambda - 1.0).abs();
    let mut worst = 0.0_f64;
    for seed in 0..FIT_TRIALS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<(f64, f64)> = rnl(&lengths, lambda)
            .into_iter()
            .map(|(l, r)| (l, r * (1.0 + rng.gen_range(-FIT_NOISE..=FIT_NOISE))))
            .collect();
        let fit = fit_spin_flip_length(&noisy).unwrap().fitted_value;
        worst = worst.max((fit / lambda - 1.0).abs());
    }
    outcome(
        exact_err <= FIT_EXACT_REL_TOL && worst <= FIT_NOISY_REL_TOL,
        format!(
            "noiseless {:.6} nm (rel err {exact_err:.1e}, tol {FIT_EXACT_REL_TOL:.0e}); \
             ±{:.0}% noise worst of {FIT_TRIALS} trials {:.2}% (tol {:.0}%)",
            exact * 1e9,
            100.0 * FIT_NOISE,
            100.0 * worst,
            100.0 * FIT_NOISY_REL_TOL
        ),
    )
}

fn array_for(set: &CalibratedSet, d: Design, rows: usize, cols: usize, bits: usize) -> MemoryArray {
    MemoryArray::new(set.get(d).unwrap().clone(), ArrayConfig::small(rows, cols, bits)).unwrap()
}

fn c6_truth_tables(set: &CalibratedSet) -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for d in [Design::Dvsh, Design::Dgsh] {
        let mut a = array_for(set, d, 2, 4, 4);
        // column k holds operands (k >> 1, k & 1)
        a.write_word(0, 0, 0b1100).unwrap();
        a.write_word(1, 0, 0b1010).unwrap();
        let readout = a.cim_access(0, 1, 0, ReferenceKind::CimAnd).unwrap();
        for (k, r) in readout.results.iter().enumerate() {
            let (x, y) = (k >> 1 & 1 == 1, k & 1 == 1);
            let c = match r.out2.map(|o2| derive_logics(r.out1, o2)) {
                Some(Ok(c)) => c,
                _ => {
                    mismatches += 6;
                    continue;
                }
            };
            let got = [c.and_, c.nor_, c.nand_, c.or_, c.xor_, c.xnor_];
            let want = [x && y, !(x || y), !(x && y), x || y, x ^ y, !(x ^ y)];
            mismatches += got.iter().zip(want).filter(|(g, w)| **g != *w).count();
            checked += 6;
        }
    }
    outcome(
        mismatches == 0,
        format!("DVSH+DGSH: {checked} entries (AND, NOR, NAND, OR, XOR, XNOR x 4 operand pairs), {mismatches} mismatches"),
    )
}

fn c7_addition(set: &CalibratedSet) -> Outcome {
    let start = Instant::now();
    let mut failures = 0usize;
    let mut a8 = array_for(set, Design::Dvsh, 2, 8, 8);
    for x in 0..256u64 {
        a8.write_word(0, 0, x).unwrap();
        for y in 0..256u64 {
            a8.write_word(1, 0, y).unwrap();
            let r = add_words(&mut a8, 0, 1, 0, false).unwrap();
            let full = x + y;
            if r.sum != full & 0xFF || r.carry_out != (full > 0xFF) {
                failures += 1;
            }
        }
        a8.clear_log();
    }
    let mut a32 = array_for(set, Design::Dvsh, 2, 32, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..ADD_RANDOM_TRIALS {
        let (x, y) = (rng.gen::<u32>() as u64, rng.gen::<u32>() as u64);
        let cin = rng.gen::<bool>();
        a32.write_word(0, 0, x).unwrap();
        a32.write_word(1, 0, y).unwrap();
        let r = add_words(&mut a32, 0, 1, 0, cin).unwrap();
        let full = x + y + cin as u64;
        if r.sum != full & 0xFFFF_FFFF || r.carry_out != (full >> 32 == 1) {
            failures += 1;
        }
        if k % 1000 == 999 {
            a32.clear_log();
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < ADD_TIME_LIMIT_S,
        format!(
            "65536 exhaustive 8-bit + {ADD_RANDOM_TRIALS} random 32-bit adds on DVSH, \
             {failures} mismatches, {secs:.2} s (limit {ADD_TIME_LIMIT_S:.0} s)"
        ),
    )
}

fn c8_margin_algebra(set: &CalibratedSet) -> Outcome {
    let mut ok = true;
    let mut worst_linear = 0.0_f64;
    for d in Design::ALL {
        let m = set.get(d).unwrap();
        let bias = ReadBias::new(defaults::V_DD, defaults::V_READ).unwrap();
        let (i_p, i_ap) = vshmem::readpath::read_current_pair(&m.config, &bias).unwrap();
        let i_ref = reference_current(ReferenceKind::Read, i_p, i_ap).unwrap();
        let single = rcsa_resolve(i_p, None, SenseMode::SingleEnded, Some(i_ref)).unwrap().margin;
        let diff = rcsa_resolve(i_p, Some(i_ap), SenseMode::Differential, None).unwrap().margin;
        ok &= within_ulps_of(diff, 2.0 * single, MARGIN_EXACT_ULPS, 2.0 * i_p);

        let and_ref = reference_current(ReferenceKind::CimAnd, i_p, i_ap).unwrap();
        let or_ref = reference_current(ReferenceKind::CimOr, i_p, i_ap).unwrap();
        let half = (i_p - i_ap) / 2.0;
        for dist in [and_ref - 2.0 * i_ap, (i_p + i_ap) - and_ref, or_ref - (i_p + i_ap), 2.0 * i_p - or_ref]
        {
            ok &= within_ulps_of(dist, half, MARGIN_EXACT_ULPS, 2.0 * i_p);
        }

        let sm = |v| sense_margin(m, defaults::V_DD, v).unwrap();
        let slope = sm(0.4) / 0.4;
        for v in [0.05, 0.1, 0.2, 0.3, 0.5, 0.6] {
            worst_linear = worst_linear.max((sm(v) / (slope * v) - 1.0).abs());
        }
    }
    let pass = ok && worst_linear <= SM_LINEAR_TOL;
    outcome(
        pass,
        format!(
            "all designs: diff = 2x single and CiM boundaries at (I_P-I_AP)/2 within \
             {MARGIN_EXACT_ULPS} ulp of 2 I_P: {ok}; SM linearity worst {:.3}% over 0.05..0.6 V (tol {:.0}%)",
            100.0 * worst_linear,
            100.0 * SM_LINEAR_TOL
        ),
    )
}

fn c9_disturb(set: &CalibratedSet) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst_gs = 0.0_f64;
    let mut worst_ds = 0.0_f64;
    for d in Design::ALL {
        let initial = {
            let mut a = array_for(set, d, 16, 16, 8);
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            for row in 0..16 {
                for w in 0..2 {
                    a.write_word(row, w, rng.gen::<u8>() as u64).unwrap();
                }
            }
            a.clear_log();
            a
        };
        let mut a = initial.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(900 + d as u64);
        for _ in 0..DISTURB_OPS {
            let row = rng.gen_range(0..16);
            let word = rng.gen_range(0..2);
            match rng.gen_range(0..3) {
                0 => {
                    a.write_word(row, word, rng.gen::<u8>() as u64).unwrap();
                }
                1 => {
                    a.read_word(row, word).unwrap();
                }
                _ => {
                    let other = (row + rng.gen_range(1..16)) % 16;
                    let kind = if rng.gen() { ReferenceKind::CimAnd } else { ReferenceKind::CimOr };
                    a.cim_access(row, other, word, kind).unwrap();
                }
            }
        }
        let rep = disturb_check(&initial, a.log()).unwrap();
        ok &= rep.is_clean() && rep.ops_checked == DISTURB_OPS;
        worst_gs = worst_gs.max(rep.half_selected_max_v_gs);
        worst_ds = worst_ds.max(rep.half_selected_max_v_ds);
        parts.push(format!("{d} {} violations", rep.violations.len()));
    }
    outcome(
        ok,
        format!(
            "{DISTURB_OPS} random ops on 16x16 per design ({}): unaccessed cells bit-identical and \
             current-free, cells outside every accessed row and column at V_GS = V_DS = 0; half-selected cells peak at \
             |V_GS| = {worst_gs:.2} V, |V_DS| = {worst_ds:.2} V with zero current",
            parts.join(", ")
        ),
    )
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/comparison_default.json")
}

fn table_matches(a: &ComparisonTable, b: &ComparisonTable) -> bool {
    let va = serde_json::to_value(a).unwrap();
    let vb = serde_json::to_value(b).unwrap();
    fn close(x: &serde_json::Value, y: &serde_json::Value) -> bool {
        use serde_json::Value::*;
        match (x, y) {
            (Number(p), Number(q)) => {
                let (p, q) = (p.as_f64().unwrap(), q.as_f64().unwrap());
                (p - q).abs() <= FIXTURE_REL_TOL * p.abs().max(q.abs())
            }
            (Array(p), Array(q)) => p.len() == q.len() && p.iter().zip(q).all(|(p, q)| close(p, q)),
            (Object(p), Object(q)) => {
                p.len() == q.len() && p.iter().all(|(k, v)| q.get(k).is_some_and(|w| close(v, w)))
            }
            _ => x == y,
        }
    }
    close(&va, &vb)
}

fn c10_orderings(set: &CalibratedSet) -> Outcome {
    let params = vshmem::metrics::EnergyModelParams::default();
    let table = match compare_designs(
        &set.designs,
        &ArrayConfig::default(),
        &params,
        ReadPolicy::IsoSenseMargin(SM_MIN),
    ) {
        Ok(t) => t,
        Err(e) => return outcome(false, format!("comparison failed: {e}")),
    };
    let r = |d| table.row(d).unwrap();
    let checks = [
        ("WE(VSH)<WE(GSH)", r(Design::Vsh).write_energy < r(Design::Gsh).write_energy),
        ("WE(DVSH)<WE(DGSH)", r(Design::Dvsh).write_energy < r(Design::Dgsh).write_energy),
        ("RE(VSH)<RE(GSH)", r(Design::Vsh).read_energy < r(Design::Gsh).read_energy),
        ("RE(DVSH)<RE(DGSH)", r(Design::Dvsh).read_energy < r(Design::Dgsh).read_energy),
        ("E(CiM ADD)<=E(NMC ADD)", table.rows.iter().all(|x| x.cim_add_energy <= x.nmc_add_energy)),
        ("WT(VSH)=WT(DVSH)", r(Design::Vsh).write_time == r(Design::Dvsh).write_time),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();

    let path = fixture_path();
    let fixture = if std::env::var_os("VSHMEM_BLESS").is_some() {
        let mut text = serde_json::to_string_pretty(&table).unwrap();
        text.push('\n');
        std::fs::write(&path, text).unwrap();
        "rewritten".to_string()
    } else {
        match std::fs::read_to_string(&path).map(|t| serde_json::from_str::<ComparisonTable>(&t)) {
            Ok(Ok(frozen)) if table_matches(&table, &frozen) => {
                format!("matches within {FIXTURE_REL_TOL:.0e}")
            }
            Ok(Ok(_)) => "DIFFERS".to_string(),
            _ => "MISSING".to_string(),
        }
    };
    let norm: Vec<String> = table
        .rows
        .iter()
        .map(|x| {
            format!(
                "{} WE {:.3} RE {:.3} WT {:.3}",
                x.design, x.norm_write_energy, x.norm_read_energy, x.norm_write_time
            )
        })
        .collect();
    let pass = failed.is_empty() && !fixture.starts_with('D') && !fixture.starts_with('M');
    outcome(
        pass,
        format!(
            "iso-SM {:.1} uA orderings {}; fixture {fixture}; normalized: {}",
            SM_MIN * 1e6,
            if failed.is_empty() {
                "all hold".to_string()
            } else {
                format!("violated: {}", failed.join(", "))
            },
            norm.join("; ")
        ),
    )
}

fn undriven_energy_decays(p: &MagnetParams) -> (bool, f64) {
    let tilt = 0.5_f64;
    let m0 = tilt.cos() * p.easy_axis() + tilt.sin() * p.tilt_axis();
    let traj =
        llgs_integrate(MagnetizationState::new(m0), &SpinTorque::none(), p, DEFAULT_STEP, 5e-9).unwrap();
    let e: Vec<f64> = traj.states.iter().map(|s| magnetic_energy(&s.m, p)).collect();
    let scale = e[0].abs();
    let monotone = e.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale);
    (monotone && e[e.len() - 1] < e[0], traj.max_step_drift)
}

fn c11_conservation(set: &CalibratedSet) -> Outcome {
    let mut worst_balance = 0.0_f64;
    let mut solves = 0;
    for d in Design::ALL {
        let cfg = &set.get(d).unwrap().config;
        let diff = d.is_differential();
        for v_read in [0.1, 0.2, 0.4] {
            let bias = ReadBias::new(defaults::V_DD, v_read).unwrap();
            for cells in [
                vec![CellMtjs::for_bit(false, diff)],
                vec![CellMtjs::for_bit(true, diff)],
                vec![CellMtjs::for_bit(false, diff), CellMtjs::for_bit(true, diff)],
                vec![CellMtjs::for_bit(true, diff), CellMtjs::for_bit(true, diff)],
            ] {
                let rn = build_column_network(&cells, cfg, &bias).unwrap();
                let sol = solve_network(&rn.network).unwrap();
                worst_balance = worst_balance.max(sol.max_relative_residual(&rn.network));
                solves += 1;
            }
        }
    }

    let mut worst_norm = 0.0_f64;
    let mut worst_drift = 0.0_f64;
    let mut dissipative = true;
    for d in [Design::Vsh, Design::Gsh] {
        let m = set.get(d).unwrap();
        let p = &m.config.magnet;
        let w = m.write.unwrap();
        let torque = SpinTorque::new(w.spin_current, -p.easy_axis());
        let traj = llgs_integrate(
            MagnetizationState::new(tilted_pole(p, 1.0)),
            &torque,
            p,
            DEFAULT_STEP,
            w.pulse_width,
        )
        .unwrap();
        worst_drift = worst_drift.max(traj.max_step_drift);
        for s in &traj.states {
            worst_norm = worst_norm.max((s.m.norm() - 1.0).abs());
        }
        let (decays, drift) = undriven_energy_decays(p);
        dissipative &= decays;
        worst_drift = worst_drift.max(drift);
    }
    let pass = worst_balance < NODE_BALANCE_TOL
        && worst_drift < NORM_DRIFT_TOL
        && worst_norm < NORM_DRIFT_TOL
        && dissipative;
    outcome(
        pass,
        format!(
            "{solves} network solves, worst node balance {worst_balance:.1e} (tol {NODE_BALANCE_TOL:.0e}); \
             LLGS worst per-step |m|-1 {worst_drift:.1e} (tol {NORM_DRIFT_TOL:.0e}); \
             undriven energy non-increasing: {dissipative}"
        ),
    )
}

fn main() {
    let t0 = Instant::now();
    let set = calibrated();
    let results = [
        c1_spin_injection(),
        c2_thermal_stability(),
        c3_anisotropy_field(),
        c4_switching_calibration(),
        c5_spin_flip_fit(),
        c6_truth_tables(&set),
        c7_addition(&set),
        c8_margin_algebra(&set),
        c9_disturb(&set),
        c10_orderings(&set),
        c11_conservation(&set),
    ];
    let mut failed = 0;
    for (k, r) in results.iter().enumerate() {
        println!("criterion {:>2}: {}  {}", k + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
        failed += usize::from(!r.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        results.len() - failed,
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
