use std::path::Path;
use std::process::{Command, Output};

use psh_spectra::cli::{load_records, sibling_json, CliError, CommandKind, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psh-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn oracle_two_sites_closed_form() {
    // J = 0.6, Δ = 0.8: ±√(J² + 4Δ²) in the even sector, ∓J otherwise.
    let o = run(&["oracle", "--n", "2", "--jt", "0.6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let e: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let p: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    let s = 2.92f64.sqrt();
    for (a, b) in e.iter().zip([-s, -0.6, 0.6, s]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(p, ["1", "1", "-1", "1"]);
}

#[test]
fn spectrum_rows_and_columns() {
    let o = run(&["spectrum", "--n", "4", "--jt", "0.5", "--gt", "0.21"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("level_id,re_eps,im_eps,z2_index,ep_indicator\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 16);
    let real = rows.iter().filter(|r| r[3] != "0").count();
    assert_eq!(real % 2, 0);
}

#[test]
fn sweep_writes_tracks_and_sibling_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig/sweep.csv");
    let o = run(&[
        "sweep", "--n", "4", "--gt", "0.21", "--start", "-0.9", "--end", "0.9", "--points", "121", "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 121 * 16);
    let json = sibling_json(&out);
    assert_eq!(json, dir.path().join("fig/sweep.ep.json"));
    let file = load_records(&json).unwrap();
    assert_eq!(file.fixed_value, 0.21);
    assert!(!file.records.is_empty());
    assert!(file.selection.holds());
}

#[test]
fn tampered_records_fail_to_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["sweep", "--n", "4", "--gt", "0.21", "--points", "101", "--start", "-0.9", "--end", "0.9", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json = sibling_json(&out);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let rec = &mut v["records"][0];
    let first = rec["indices"][0].clone();
    rec["indices"][1] = first;
    std::fs::write(&json, v.to_string()).unwrap();
    assert!(matches!(load_records(&json), Err(CliError::Invariant(_))));
}

#[test]
fn config_file_round_trip_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        command: Some(CommandKind::Spectrum),
        ..Default::default()
    };
    cfg.chain.j_tilde = -0.3;
    cfg.chain.gamma_tilde = 0.1;
    let path = dir.path().join("run.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    assert_eq!(RunConfig::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap(), cfg);

    let via_run = run(&["run", "--config", path.to_str().unwrap()]);
    let direct = run(&["spectrum", "--jt", "-0.3", "--gt", "0.1"]);
    assert_eq!(code(&via_run), 0, "{}", stderr(&via_run));
    assert_eq!(via_run.stdout, direct.stdout);

    // Flags override the file.
    let over = run(&["run", "--config", path.to_str().unwrap(), "--n", "2"]);
    assert_eq!(csv_rows(&String::from_utf8(over.stdout).unwrap()).len(), 4);
}

#[test]
fn usage_errors_name_the_field() {
    let cases: [(&[&str], &str); 6] = [
        (&["spectrum", "--n", "3"], "chain.n"),
        (&["spectrum", "--jt", "1.5"], "chain.j_tilde"),
        (&["sweep", "--points", "1"], "grid.points"),
        (&["spectrum", "--tol", "bogus=1e-3"], "tolerances.bogus"),
        (&["find-ep", "--order", "4"], "order"),
        (&["sweep", "--grid", "fancy"], "grid"),
    ];
    for (args, field) in cases {
        let o = run(args);
        assert_eq!(code(&o), 1, "{args:?}");
        assert!(stderr(&o).contains(&format!("{field}:")), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(code(&run(&["spectrum", "--no-such-flag"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn run_without_or_against_the_config_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"chain": {"n": 2}}"#).unwrap();
    let o = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("command:"));

    std::fs::write(&path, r#"{"command": "oracle"}"#).unwrap();
    let o = run(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("command:"));

    std::fs::write(&path, r#"{"command": "oracle", "chain": {"sites": 4}}"#).unwrap();
    let o = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("sites"));
}

#[test]
fn tolerance_override_trips_the_oracle_check() {
    let o = run(&["oracle", "--n", "6", "--jt", "0.3", "--tol", "oracle_energy=1e-300"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("invariant"));
}

#[test]
fn unwritable_output_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let target = Path::new(&file).join("out.csv");
    let o = run(&["spectrum", "--n", "2", "-o", target.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn verify_default_grid_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = run(&["verify", "--n", "4", "--grid", "default", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["sweeps"].as_array().unwrap().len(), 4);
    assert!(v["selection"]["violations"].as_array().unwrap().is_empty());
    assert!(v["selection"]["checked"].as_u64().unwrap() > 0);
}

#[test]
fn crossings_json() {
    let o = run(&["crossings", "--n", "4", "--fixed", "0", "--start", "0.3", "--end", "0.9", "--points", "241", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut at: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["kind"] == "opposite")
        .map(|c| c["parameter"].as_f64().unwrap())
        .collect();
    at.sort_by(f64::total_cmp);
    at.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    assert_eq!(at.len(), 3, "{at:?}");
    assert!((at[2] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["find-ep", "--n", "4", "--gt", "0.21", "--points", "201", "--format", "json"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
}
