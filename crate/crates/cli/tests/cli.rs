use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;
use tempfile::TempDir;

fn bpskit(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bpskit"));
    cmd.current_dir(dir).arg("--out").arg(dir.join("out")).args(args);
    for var in ["S_ORDER", "U_ORDER", "Q_ORDER", "M_WINDOW", "K_MAX", "TOL", "SIGN_MODE", "PRECISION", "OUT"] {
        cmd.env_remove(format!("BPSKIT_{var}"));
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn bpskit")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn csv(dir: &Path, name: &str) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("out").join(name))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const ONE_CHARGE: &str =
    r#"{"rank":2,"pairing":[[0,1],[-1,0]],"charges":[["1.0","0.0"],["0.0","1.0"]],"spectrum":[[[1,0],"1"]]}"#;
const NO_SPECTRUM: &str =
    r#"{"rank":2,"pairing":[[0,1],[-1,0]],"charges":[["1.0","0.3"],["-0.2","1.0"]],"spectrum":[]}"#;

#[test]
fn convert_genus_one() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[1],"degrees":{"1":1}}]"#);
    let out = bpskit(d.path(), &["convert", "--gv", "gv.json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let omega = &json(d.path(), "omega.json")["report"][0]["report"];
    assert_eq!(omega, &serde_json::json!({"-1": -1, "0": 2, "1": -1}));
}

#[test]
fn convert_empty_and_malformed() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", "[]");
    let out = bpskit(d.path(), &["convert", "--gv", "gv.json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(d.path(), "omega.json")["report"], serde_json::json!([]));
    assert_eq!(json(d.path(), "sheaf.json")["report"], serde_json::json!([]));

    write(
        d.path(),
        "bad.json",
        r#"{"rank":2,"pairing":[[0,1],[-1,0]],"charges":[["1","0"],["0","1"]],"spectrum":[[[1,0],"1/x"]]}"#,
    );
    let out = bpskit(d.path(), &["convert", "--bps", "bad.json"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spectrum[0]"));

    let out = bpskit(d.path(), &["convert"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convert_dt_table() {
    let d = TempDir::new().unwrap();
    write(d.path(), "bps.json", ONE_CHARGE);
    let out = bpskit(d.path(), &["--s-order", "4", "convert", "--bps", "bps.json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let dt = &json(d.path(), "dt.json")["report"][0]["table"]["dt"];
    let values: Vec<&str> = dt.as_array().unwrap().iter().map(|r| r["dt"].as_str().unwrap()).collect();
    assert_eq!(values, vec!["1", "1/4", "1/9", "1/16"]);
}

#[test]
fn flat_section_trivial_spectrum_is_exponential() {
    let d = TempDir::new().unwrap();
    write(d.path(), "bps.json", NO_SPECTRUM);
    let args = [
        "--precision", "17", "flat-section", "--bps", "bps.json", "--target", "1,0", "--ray-angle", "0.7",
        "--points", "4", "--exponential", "plus",
    ];
    let out = bpskit(d.path(), &args, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(d.path(), "flat_section.csv");
    assert_eq!(rows.len(), 4);
    let z = Complex64::new(1.0, 0.3);
    for r in rows {
        assert_eq!((r[3].as_str(), r[4].as_str()), ("0", "1;0"));
        let t = Complex64::new(r[1].parse().unwrap(), r[2].parse().unwrap());
        let v = Complex64::new(r[5].parse().unwrap(), r[6].parse().unwrap());
        assert_eq!(v, (z / t).exp());
    }
}

#[test]
fn flat_section_grid_refinement_and_row_count() {
    let d = TempDir::new().unwrap();
    write(d.path(), "bps.json", ONE_CHARGE);
    let base = ["--s-order", "2", "flat-section", "--bps", "bps.json", "--target", "0,1", "--ray-angle", "0.9"];
    let coarse: Vec<&str> = base.iter().copied().chain(["--points", "3"]).collect();
    assert_eq!(bpskit(d.path(), &coarse, &[]).status.code(), Some(0));
    let rows3 = csv(d.path(), "flat_section.csv");
    let fine: Vec<&str> = base.iter().copied().chain(["--points", "5"]).collect();
    assert_eq!(bpskit(d.path(), &fine, &[]).status.code(), Some(0));
    let rows5 = csv(d.path(), "flat_section.csv");
    // x_{(0,1)} picks up s^p x_{(p,1)} at each order p <= 2
    assert_eq!(rows3.len(), 3 * 3);
    assert_eq!(rows5.len(), 5 * 3);
    for r in &rows3 {
        assert!(rows5.contains(r), "row {r:?} changed under refinement");
    }
}

#[test]
fn flat_section_rejects_active_ray() {
    let d = TempDir::new().unwrap();
    write(d.path(), "bps.json", ONE_CHARGE);
    let out = bpskit(d.path(), &["flat-section", "--bps", "bps.json", "--target", "0,1", "--ray-angle", "0"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jump_check_passes() {
    let d = TempDir::new().unwrap();
    write(d.path(), "bps.json", ONE_CHARGE);
    let out = bpskit(d.path(), &["jump-check", "--bps", "bps.json", "--target", "0,1"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(d.path(), "jump.json")["report"]["passed"], Value::Bool(true));
}

#[test]
fn verify_modes() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[1],"degrees":{"0":1}}]"#);
    let out = bpskit(d.path(), &["--u-order", "4", "--q-order", "3", "verify-theorem", "--gv", "gv.json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(d.path(), "verify.json");
    assert_eq!(report["report"]["theorem"][0]["report"]["passed"], Value::Bool(true));

    let out = bpskit(
        d.path(),
        &["--u-order", "4", "--q-order", "3", "--sign-mode", "literal", "verify-theorem", "--gv", "gv.json"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let cmp = &json(d.path(), "verify.json")["report"]["theorem"][0]["report"]["comparison"];
    assert!(!cmp["discrepancies"].as_array().unwrap().is_empty());
    assert_eq!(cmp["common_ratio"], Value::String("2 * Pi^1".into()));
}

#[test]
fn verify_flags_asymmetric_omega() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[1],"degrees":{"0":1}}]"#);
    write(d.path(), "omega.json", r#"[{"class":[1],"omega":{"-2":1,"0":2,"1":-1,"-1":-1}}]"#);
    let out = bpskit(
        d.path(),
        &["--u-order", "2", "--q-order", "2", "verify-theorem", "--gv", "gv.json", "--omega", "omega.json"],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let row = &json(d.path(), "verify.json")["report"]["omega_symmetry"][0];
    assert_eq!(row["class"], serde_json::json!([1]));
    assert_eq!(row["offending_n"], serde_json::json!(2));
}

#[test]
fn env_overrides_and_precedence() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[1],"degrees":{"0":1}}]"#);
    let env = [("BPSKIT_Q_ORDER", "2"), ("BPSKIT_U_ORDER", "3")];
    assert_eq!(bpskit(d.path(), &["verify-theorem", "--gv", "gv.json"], &env).status.code(), Some(0));
    let cmp = &json(d.path(), "verify.json")["report"]["theorem"][0]["report"]["comparison"];
    assert_eq!((cmp["q_order"].as_u64(), cmp["u_order"].as_i64()), (Some(2), Some(3)));
    assert_eq!(bpskit(d.path(), &["--q-order", "4", "verify-theorem", "--gv", "gv.json"], &env).status.code(), Some(0));
    let cmp = &json(d.path(), "verify.json")["report"]["theorem"][0]["report"]["comparison"];
    assert_eq!((cmp["q_order"].as_u64(), cmp["u_order"].as_i64()), (Some(4), Some(3)));
}

#[test]
fn input_errors_exit_two() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[1],"degrees":{"0":1}}]"#);
    assert_eq!(bpskit(d.path(), &["--tol", "-1", "verify-theorem", "--gv", "gv.json"], &[]).status.code(), Some(2));
    assert_eq!(bpskit(d.path(), &["verify-theorem", "--gv", "missing.json"], &[]).status.code(), Some(2));
    assert_eq!(bpskit(d.path(), &["verify-theorem", "--gv", "gv.json", "--class", "2"], &[]).status.code(), Some(2));
    assert_eq!(bpskit(d.path(), &["--sign-mode", "odd", "verify-theorem", "--gv", "gv.json"], &[]).status.code(), Some(2));
    write(d.path(), "broken.json", r#"[{"class":[1],"degrees":{"0":"one"}}]"#);
    let out = bpskit(d.path(), &["convert", "--gv", "broken.json"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn asymptotics_and_curve() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[1],"degrees":{"0":2,"1":3,"2":1}}]"#);
    let out = bpskit(d.path(), &["asymptotics", "--gv", "gv.json", "--d-beta", "1"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = &json(d.path(), "exponents.json")["report"][0]["report"];
    // genus g contributes 2g + 1 factors
    assert_eq!(rows.as_array().unwrap().len(), 1 + 3 + 5);
    assert_eq!(rows[0]["exponent_num"], serde_json::json!(-1));
    assert_eq!(rows[0]["exponent_den"], serde_json::json!(1));

    let out = bpskit(d.path(), &["emit-curve", "--gv", "gv.json", "--points", "7"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(d.path(), "curve.csv");
    assert_eq!(rows.len(), 7);
    let dist: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(dist[6] < dist[3] && dist[3] < dist[0]);
}

#[test]
fn geometry_supplies_degree_and_pairing() {
    let d = TempDir::new().unwrap();
    write(d.path(), "gv.json", r#"[{"class":[2],"degrees":{"0":1}}]"#);
    write(d.path(), "geom.json", r#"{"b2":1,"kahler":[0.25],"epsilon":0.1,"intersections":[[3]]}"#);
    let out = bpskit(d.path(), &["asymptotics", "--gv", "gv.json", "--geometry", "geom.json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(d.path(), "asymptotics.json")["report"][0]["report"]["config"];
    assert_eq!(r["degree"], serde_json::json!(0.5));
    assert_eq!(r["d_beta"], serde_json::json!(6));
}
