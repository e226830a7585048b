use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn czkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_czkit")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_rows(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = czkit(&["gen", "--kind", "cantor", "--depth", "6", "--seed", "7", "--out", s(p)]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = czkit(&["gen", "--kind", "cantor", "--depth", "6", "--seed", "7"]);
    assert_eq!(o.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn generated_measure_survives_a_reload() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    assert!(czkit(&["gen", "--kind", "clustered", "--dim", "2", "--seed", "3", "--out", s(&p)]).status.success());
    let mu: czkit::measure::DiscreteMeasure<f64> = czkit::io::load_measure(&p).unwrap();
    let q = dir.path().join("m2.json");
    czkit::io::save_measure(&q, &mu).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
}

#[test]
fn numbers_carry_seventeen_digits() {
    let o = czkit(&["gen", "--kind", "cantor", "--depth", "2"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("6.3092975357145742e-1"), "{text}");
    assert!(text.contains("2.5000000000000000e-1"));
}

#[test]
fn hl_maximal_of_constant_on_two_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = czkit(&[
        "maximal", "--measure", &fixture("two_atoms.json"), "--function", &fixture("two_atoms_one.json"),
        "--op", "hl", "--rho", "2", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_rows(&out);
    assert_eq!(header, ["x", "lower", "upper"]);
    assert_eq!(rows, vec![vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]);
}

#[test]
fn grand_maximal_of_sign_pattern_on_two_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = czkit(&[
        "maximal", "--measure", &fixture("two_atoms.json"), "--function", &fixture("two_atoms_sign.json"),
        "--op", "grand", "--out", s(&out),
    ]);
    assert!(o.status.success());
    let (_, rows) = read_rows(&out);
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[2], 1.0);
        assert!(r[1] > 0.0 && r[1] <= r[2]);
    }
}

#[test]
fn czd_reports_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let out = dir.path().join("dec.json");
    assert!(czkit(&["gen", "--kind", "grid", "--per-axis", "24", "--out", s(&m)]).status.success());
    let o = czkit(&["czd", "--measure", s(&m), "--lambda", "0.5", "--seed", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    let inv = v["invariants"].as_array().unwrap();
    assert!(!inv.is_empty());
    assert!(inv.iter().all(|c| c["pass"].is_boolean()));
}

#[test]
fn mainlemma_writes_ledger_and_claims() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let out = dir.path().join("ml.json");
    assert!(czkit(&["gen", "--kind", "cantor", "--depth", "4", "--out", s(&m)]).status.success());
    let o = czkit(&["mainlemma", "--measure", s(&m), "--R0", "auto", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["ledger", "claims", "params", "generations", "retries", "residual"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert!(v["residual"].as_f64().unwrap() <= 1e-8 * v["f_l1"].as_f64().unwrap());
}

#[test]
fn params_override_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let p = dir.path().join("p.json");
    let out = dir.path().join("ml.json");
    assert!(czkit(&["gen", "--kind", "geometric", "--levels", "20", "--out", s(&m)]).status.success());
    std::fs::write(&p, r#"{"checked": false, "eps3": 0.25}"#).unwrap();
    let _ = czkit(&["mainlemma", "--measure", s(&m), "--params", s(&p), "--out", s(&out)]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["params"]["eps3"], 0.25);
    assert_eq!(v["params"]["checked"], false);
}

#[test]
fn analyze_and_rbmo_write_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let (d, jn) = (dir.path().join("d.csv"), dir.path().join("jn.csv"));
    assert!(czkit(&["gen", "--kind", "grid", "--dim", "2", "--per-axis", "5", "--out", s(&m)]).status.success());
    assert!(czkit(&["analyze", "--measure", s(&m), "--delta-out", s(&d)]).status.success());
    let (h, rows) = read_rows(&d);
    assert_eq!(h, ["zQ_0", "zQ_1", "lQ", "zR_0", "zR_1", "lR", "delta"]);
    assert!(!rows.is_empty());
    let o = czkit(&["rbmo", "--measure", s(&m), "--jn", s(&jn)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
    let (h, rows) = read_rows(&jn);
    assert_eq!(h, ["lambda", "fraction"]);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
}

#[test]
fn verify_cubes_succeeds() {
    let o = czkit(&["verify", "--suite", "cubes"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn thread_cap_is_honored() {
    let o = Command::new(env!("CARGO_BIN_EXE_czkit"))
        .args(["verify", "--suite", "measure"])
        .env("CZKIT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_czkit"))
        .args(["verify", "--suite", "measure"])
        .env("CZKIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn io_and_schema_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.json");
    assert_eq!(czkit(&["analyze", "--measure", s(&missing)]).status.code(), Some(3));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 1, "points": [[0.0]]}"#).unwrap();
    assert_eq!(czkit(&["analyze", "--measure", s(&bad)]).status.code(), Some(3));
    assert_eq!(czkit(&["verify", "--suite", "nonsense"]).status.code(), Some(3));
    assert_eq!(czkit(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(czkit(&["--help"]).status.code(), Some(0));
}

#[test]
fn violated_properties_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let p = dir.path().join("p.json");
    let out = dir.path().join("ml.json");
    assert!(czkit(&["gen", "--kind", "geometric", "--levels", "64", "--out", s(&m)]).status.success());
    // The smallest chain allowed by the measured constants is too short for the claims here.
    let mu = czkit::corpus::geometric(64);
    let tight = czkit::io::ParamsFile::from_params(&czkit::corpus::tight_params(&mu).unwrap());
    czkit::io::write_json(&p, &tight).unwrap();
    let o = czkit(&["mainlemma", "--measure", s(&m), "--params", s(&p), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.exists());
}
