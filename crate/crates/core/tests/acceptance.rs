//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use psh_spectra::biortho::{spectrum, Z2};
use psh_spectra::epscan::{
    classify_crossings, crossing_split, crossing_two_level, crossings_of_kind, fit_slope, linspace, predict_chain_gamma_cr,
    scan_ep2, sweep, Axis, ChainFamily, CrossingKind, Ep3Search, TripleConfig,
};
use psh_spectra::model::{build_hamiltonian, build_parity, psh_residual, staggered_profile, ChainSpec};
use psh_spectra::oracle::{almost_zero_energy, compare_with_numeric, excitation_band, full_spectrum, solve_modes};

type Outcome = Result<String, String>;

const RATIOS: [f64; 6] = [0.2, -0.2, 1.0, -1.0, 5.0, -5.0];
const GAMMAS: [f64; 4] = [0.05, 0.21, 0.40125, 0.48375];

fn normalized(r: f64) -> (f64, f64) {
    let s = (1.0 + r * r).sqrt();
    (r / s, 1.0 / s)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, out: Outcome) -> Outcome {
    let t = start.elapsed();
    match out {
        Ok(d) if t > limit => Err(format!("{d}; took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs())),
        other => other,
    }
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [2, 4, 6, 8] {
        for r in RATIOS {
            let (j, d) = normalized(r);
            let mut want: Vec<f64> = full_spectrum(n, j, d).map_err(|e| e.to_string())?.iter().map(|s| s.energy).collect();
            let h = build_hamiltonian(&ChainSpec::staggered(n, d, j, 0.0).unwrap()).unwrap();
            let s = spectrum(&h, &build_parity(n).unwrap()).map_err(|e| e.to_string())?;
            let mut got: Vec<f64> = s.levels.iter().map(|l| l.eigenvalue.re).collect();
            want.sort_by(f64::total_cmp);
            got.sort_by(f64::total_cmp);
            for (a, b) in got.iter().zip(&want) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    within(Duration::from_secs(30), start, check(worst <= 1e-9, format!("max |ΔE| = {worst:.2e} over 24 cases (tol 1e-9)")))
}

fn c2() -> Outcome {
    let mut mismatches = 0;
    let mut edge_failures = Vec::new();
    for n in [2, 4, 6, 8] {
        for r in RATIOS {
            let (j, d) = normalized(r);
            let st = full_spectrum(n, j, d).map_err(|e| e.to_string())?;
            let h = build_hamiltonian(&ChainSpec::staggered(n, d, j, 0.0).unwrap()).unwrap();
            let s = spectrum(&h, &build_parity(n).unwrap()).map_err(|e| e.to_string())?;
            let mut levels: Vec<(f64, Option<Z2>)> = s.levels.iter().map(|l| (l.eigenvalue.re, l.z2_index)).collect();
            levels.sort_by(|a, b| a.0.total_cmp(&b.0));
            let e: Vec<f64> = levels.iter().map(|l| l.0).collect();
            let ix: Vec<Option<Z2>> = levels.iter().map(|l| l.1).collect();
            mismatches += compare_with_numeric(&st, &e, &ix, 1e-8).parity_mismatches;
            let m = ix.len();
            let sj = Z2::from_sign(j);
            let low = ix[0].zip(ix[1]).map(|(a, b)| a * b);
            let high = ix[m - 2].zip(ix[m - 1]).map(|(a, b)| a * b);
            if low != Some(sj) || high != Some(sj.flip()) {
                edge_failures.push(format!("N={n} J/Δ={r}"));
            }
        }
    }
    check(
        mismatches == 0 && edge_failures.is_empty(),
        format!("{mismatches} index/parity mismatches; edge-pair identities fail in {edge_failures:?}"),
    )
}

fn c3() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::deterministic();
    let strategy = (
        proptest::sample::select(vec![2usize, 4, 6]),
        0.05f64..2.0,
        -2.0f64..2.0,
        proptest::collection::vec(-1.0f64..1.0, 3),
        proptest::bool::ANY,
    );
    let (mut worst, mut staggered) = (0.0f64, 0);
    for _ in 0..100 {
        let (n, delta, j, half, stag) = strategy.new_tree(&mut runner).unwrap().current();
        let profile = if stag {
            staggered += 1;
            staggered_profile(n, half[0])
        } else {
            let mut p: Vec<f64> = half[..n / 2].to_vec();
            p.extend(half[..n / 2].iter().rev().map(|g| -g));
            p
        };
        let spec = ChainSpec::with_profile(n, delta, j, profile).map_err(|e| e.to_string())?;
        let h = build_hamiltonian(&spec).unwrap();
        worst = worst.max(psh_residual(&h, &build_parity(n).unwrap()).unwrap());
    }
    within(
        Duration::from_secs(10),
        start,
        check(worst <= 1e-12, format!("max ‖PH − H†P‖_F = {worst:.2e} over 100 specs ({staggered} staggered)")),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_psh-spectra")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn verify_args(out: &Path, threads: &str) -> Vec<String> {
    ["verify", "--n", "4", "--grid", "default", "--threads", threads, "-o"]
        .iter()
        .map(|s| s.to_string())
        .chain([out.display().to_string()])
        .collect()
}

fn ep3_args(out: &Path, threads: &str) -> Vec<String> {
    [
        "find-ep", "--order", "3", "--n", "4", "--j-lo", "-0.95", "--j-hi", "0.95", "--j-points", "77", "--gamma-lo", "0.35",
        "--gamma-hi", "0.45", "--format", "json", "--threads", threads, "-o",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

fn run_args(args: &[String]) -> Result<(), String> {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    cli(&refs)
}

fn c4(dir: &Path) -> Outcome {
    let start = Instant::now();
    let out = dir.join("verify-1.json");
    run_args(&verify_args(&out, "1"))?;
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (mut records, mut bad, mut unresolved) = (0, 0, 0);
    for (sweep, g) in v["sweeps"].as_array().unwrap().iter().zip(GAMMAS) {
        if sweep["fixed_value"].as_f64() != Some(g) {
            return Err(format!("sweep at {} where {g} was expected", sweep["fixed_value"]));
        }
        unresolved += sweep["unresolved"].as_array().unwrap().len();
        for r in sweep["records"].as_array().unwrap() {
            records += 1;
            let ix = r["indices"].as_array().unwrap();
            if ix.len() != 2 || ix[0].is_null() || ix[1].is_null() || ix[0] == ix[1] {
                bad += 1;
            }
        }
    }
    let reported = v["selection"]["violations"].as_array().unwrap().len();
    within(
        Duration::from_secs(300),
        start,
        check(
            records > 0 && bad == 0 && reported == 0,
            format!("{records} EP2 records on 4×801 points: {bad} without opposite indices, {reported} reported; {unresolved} unresolved grid events"),
        ),
    )
}

fn c5() -> Outcome {
    let pred = predict_chain_gamma_cr::<f64>(4, -0.95, (0, 1)).map_err(|e| e.to_string())?;
    let grid = linspace(0.0, 0.5, 501).unwrap();
    let af = ChainFamily::new(4, Axis::GammaTilde, -0.95).unwrap();
    let scan = scan_ep2(&af, &sweep(&af, &grid).map_err(|e| e.to_string())?, 1e-12).map_err(|e| e.to_string())?;
    let located = scan
        .records
        .iter()
        .find(|r| r.levels.contains(&0) && r.levels.contains(&1))
        .ok_or("no EP2 between the two lowest levels at j̃ = −0.95")?
        .parameter;
    let rel = (pred.gamma_cr - located).abs() / located;

    let fm = ChainFamily::new(4, Axis::GammaTilde, 0.95).unwrap();
    let fm_sweep = sweep(&fm, &grid).map_err(|e| e.to_string())?;
    let fm_scan = scan_ep2(&fm, &fm_sweep, 1e-12).map_err(|e| e.to_string())?;
    let ground_ep = fm_scan.records.iter().any(|r| r.levels.contains(&0) && r.levels.contains(&1));
    let stays_real = (0..grid.len()).all(|i| fm_sweep.sample(0, i).is_real() && fm_sweep.sample(1, i).is_real());
    check(
        rel <= 0.05 && !ground_ep && stays_real,
        format!(
            "γ̃_cr predicted {:.6e}, located {located:.6e}, rel err {rel:.2e} (tol 5e-2); j̃ = +0.95 ground pair EP: {ground_ep}, real to γ̃ = 0.5: {stays_real}",
            pred.gamma_cr
        ),
    )
}

fn c6() -> Outcome {
    // Opposite-index crossings at zero gain, one per j̃.
    let fam = ChainFamily::new(4, Axis::JTilde, 0.0).unwrap();
    let grid = linspace(0.3, 0.9, 241).unwrap();
    let result = sweep(&fam, &grid).map_err(|e| e.to_string())?;
    let found = classify_crossings(&fam, &result, 1e-13).map_err(|e| e.to_string())?;
    let mut crossings: Vec<(f64, f64)> = crossings_of_kind(&found, CrossingKind::Opposite).iter().map(|c| (c.parameter, c.energy)).collect();
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    crossings.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    if crossings.is_empty() {
        return Err("no opposite-index crossing at γ̃ = 0".into());
    }

    let gammas = [0.01, 0.02, 0.03, 0.04, 0.05];
    let mut slopes = Vec::new();
    let mut worst = 0.0f64;
    for &(j_c, energy) in &crossings {
        let widths: Result<Vec<f64>, _> = gammas
            .iter()
            .map(|&g| crossing_split(4, j_c, energy, g, 0.1, 401, 1e-12).map(|s| s.half_width))
            .collect();
        let fitted = fit_slope(&gammas, &widths.map_err(|e| e.to_string())?);
        let two = crossing_two_level::<f64>(4, j_c, energy).map_err(|e| e.to_string())?;
        let rel = (fitted - two.slope).abs() / two.slope;
        worst = worst.max(rel);
        slopes.push(format!("j̃ {j_c:.5}: {fitted:.4} vs |w|/α {:.4}", two.slope));
    }

    let (j_c, energy) = crossings[0];
    let split = crossing_split(4, j_c, energy, 0.21, 0.2, 401, 1e-10);
    let split_desc = match &split {
        Ok(s) => format!("j̃ {j_c:.5} splits at γ̃ 0.21 into EP2s at {:.6} and {:.6}", s.left.parameter, s.right.parameter),
        Err(e) => format!("j̃ {j_c:.5} does not split at γ̃ 0.21: {e}"),
    };

    let fam = ChainFamily::new(4, Axis::JTilde, 0.21).unwrap();
    let grid = linspace(-0.98, 0.98, 801).unwrap();
    let result = sweep(&fam, &grid).map_err(|e| e.to_string())?;
    let found = classify_crossings(&fam, &result, 1e-13).map_err(|e| e.to_string())?;
    let same = crossings_of_kind(&found, CrossingKind::Same);
    let persisting = same.iter().filter(|c| c.gap <= 1e-8).count();

    check(
        worst <= 0.1 && split.is_ok() && persisting >= 1,
        format!(
            "slopes [{}], worst rel err {worst:.2e} (tol 0.1); {split_desc}; {persisting} same-index crossings with gap ≤ 1e-8 at γ̃ 0.21",
            slopes.join("; ")
        ),
    )
}

fn c7(dir: &Path) -> Outcome {
    let out = dir.join("ep3-1.json");
    run_args(&ep3_args(&out, "1"))?;
    let search: Ep3Search<f64> =
        serde_json::from_str(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if search.found.is_empty() {
        return Err(format!("no EP3 in the box; {} candidates rejected", search.rejected.len()));
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for f in &search.found {
        let (j, g) = (f.record.location[0], f.record.location[1]);
        let in_box = (0.35..=0.45).contains(&g);
        let alternating = f.alternating() == Some(true) && f.pairs_opposite == Some(true);
        // Middle level pairs with the lower one at larger j̃, the upper one at smaller j̃.
        let direction = f.config_smaller_j == TripleConfig::UpperPaired && f.config_larger_j == TripleConfig::LowerPaired;
        ok &= in_box && alternating && f.exchanges() && direction && f.record.order == 3;
        let sig: Vec<&str> = f.record.indices.iter().map(|z| match z {
            Some(Z2::Plus) => "+",
            Some(Z2::Minus) => "-",
            None => "?",
        }).collect();
        lines.push(format!(
            "({j:.7}, {g:.7}) signature ({}) exchange {:?}→{:?} window {:.1e}",
            sig.join(","),
            f.config_smaller_j,
            f.config_larger_j,
            f.window.1 - f.window.0
        ));
    }
    check(ok, format!("{} EP3 [{}]; {} candidates rejected", search.found.len(), lines.join("; "), search.rejected.len()))
}

fn c8() -> Outcome {
    let (j, d) = normalized(10.0);
    let exact = solve_modes(8, j, d).map_err(|e| e.to_string())?[0].energy;
    let approx = almost_zero_energy(8, j, d).map_err(|e| e.to_string())?;
    let rel = (approx - exact).abs() / exact;
    // Cross-check: the lowest mode is the ground-state splitting.
    let h = build_hamiltonian(&ChainSpec::staggered(8, d, j, 0.0).unwrap()).unwrap();
    let s = spectrum(&h, &build_parity(8).unwrap()).map_err(|e| e.to_string())?;
    let mut e: Vec<f64> = s.levels.iter().map(|l| l.eigenvalue.re).collect();
    e.sort_by(f64::total_cmp);
    let gap = e[1] - e[0];
    check(
        rel <= 0.05,
        format!("ε_k₀ = {exact:.6e}, asymptote {approx:.6e}, rel err {rel:.2e} (tol 5e-2); diagonalized splitting {gap:.6e}"),
    )
}

/// EP2s on γ̃ ∈ [0, gamma_max] at j̃ = ±0.1011: `(records, intra-band, parity of band difference)`.
fn weak_coupling(gamma_max: f64) -> Result<(usize, usize, usize), String> {
    let (mut total, mut intra, mut even) = (0, 0, 0);
    for j in [0.1011, -0.1011] {
        let d = (1.0f64 - j * j).sqrt();
        let bands: Vec<usize> = full_spectrum(4, j, d).map_err(|e| e.to_string())?.iter().map(|s| excitation_band(s, j, d)).collect();
        let fam = ChainFamily::new(4, Axis::GammaTilde, j).unwrap();
        let grid = linspace(0.0, gamma_max, (gamma_max * 400.0) as usize + 1).unwrap();
        let scan = scan_ep2(&fam, &sweep(&fam, &grid).map_err(|e| e.to_string())?, 1e-10).map_err(|e| e.to_string())?;
        for r in &scan.records {
            total += 1;
            let (a, b) = (bands[r.levels[0]], bands[r.levels[1]]);
            intra += (a == b) as usize;
            even += (a.abs_diff(b) % 2 == 0) as usize;
        }
    }
    Ok((total, intra, even))
}

fn c9() -> Outcome {
    let (total, intra, even) = weak_coupling(0.3)?;
    let note = if total == 0 { " (no EP2 occurs in this range)" } else { "" };
    check(intra == 0, format!("γ̃ ≤ 0.3: {total} EP2s, {intra} intra-band, {even} with even band difference{note}"))
}

fn c9_extended() -> Outcome {
    let (total, intra, even) = weak_coupling(1.0)?;
    check(total > 0 && intra == 0 && even == 0, format!("γ̃ ≤ 1: {total} EP2s, {intra} intra-band, {even} with even band difference"))
}

fn c10(dir: &Path) -> Outcome {
    let mut same = Vec::new();
    for (name, args) in [("verify", verify_args as fn(&Path, &str) -> Vec<String>), ("ep3", ep3_args)] {
        let one = dir.join(format!("{name}-1.json"));
        let four = dir.join(format!("{name}-4.json"));
        if !one.exists() {
            run_args(&args(&one, "1"))?;
        }
        run_args(&args(&four, "4"))?;
        let a = std::fs::read(&one).map_err(|e| e.to_string())?;
        let b = std::fs::read(&four).map_err(|e| e.to_string())?;
        same.push((name, a.len(), a == b));
    }
    let desc: Vec<String> = same.iter().map(|(n, len, eq)| format!("{n} ({len} bytes) identical: {eq}")).collect();
    check(same.iter().all(|s| s.2), format!("1 vs 4 threads: {}", desc.join(", ")))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<(&str, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("C1", "oracle energies", Box::new(c1)),
        ("C2", "oracle parities", Box::new(c2)),
        ("C3", "pseudo-Hermiticity", Box::new(c3)),
        ("C4", "selection rule on the default grid", Box::new(|| c4(d))),
        ("C5", "two-level γ_cr", Box::new(c5)),
        ("C6", "crossing stability", Box::new(c6)),
        ("C7", "EP3 existence and signature", Box::new(|| c7(d))),
        ("C8", "almost-zero mode asymptote", Box::new(c8)),
        ("C9", "weak-coupling bands", Box::new(c9)),
        ("C9+", "weak-coupling bands, γ̃ ≤ 1", Box::new(c9_extended)),
        ("C10", "determinism across thread counts", Box::new(|| c10(d))),
    ];
    let mut failed = 0;
    for (id, name, f) in &criteria {
        let start = Instant::now();
        let out = f();
        let t = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS {id:<4} {name} [{t:.2} s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:<4} {name} [{t:.2} s]: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
