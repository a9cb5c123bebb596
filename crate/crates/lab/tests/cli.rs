use std::fs;
use std::path::Path;
use std::process::Command;

use nslab::cgns;
use nslab_core::ops::leray_project;
use serde_json::Value;

fn nslab(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_nslab"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn example_is_admissible_after_loading() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = nslab(&["example", "--N", "16", "--seed", "4"], dir.path());
    assert_eq!(code, 0);
    let u = cgns::read(&dir.path().join("u0.cgns")).unwrap();
    assert!(u.divergence_ratio().unwrap() <= 1e-6);
    let p = leray_project(&u).unwrap();
    assert!(p.sub(&u).unwrap().max_amplitude() <= 1e-6 * u.max_amplitude());
    let meta = json(&dir.path().join("example.json"));
    assert_eq!(meta["meta"]["config"]["N"], 16);
    assert_eq!(meta["meta"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate2d", "--init", "random", "--resolution", "16", "--t-end", "0.05", "--dt", "0.01", "--seed", "9"];
    assert_eq!(nslab(&args, a.path()).0, 0);
    assert_eq!(nslab(&args, b.path()).0, 0);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "diagnostics.csv"));
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "dim = 2\nresolution = 16\np = \"inf\"\n").unwrap();
    let (code, _) = nslab(&["besov", "--config", cfg.to_str().unwrap(), "--s", "-0.5"], dir.path());
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "norm_name,s,p,q,value,quadrature_points");
    assert_eq!(rows.len(), 3);
}

#[test]
fn p_outside_range_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stderr) = nslab(&["conditions", "check", "--p", "4"], dir.path());
    assert_eq!(code, 2);
    let err: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert!(err["message"].as_str().unwrap().contains("(6, inf)"));
    assert_eq!(json(&dir.path().join("error.json")), err);
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nslab(&["example", "--bogus", "1"], dir.path()).0, 2);
    assert_eq!(nslab(&["example", "--N", "3"], dir.path()).0, 2);
}

#[test]
fn undersized_grid_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stderr) = nslab(&["example", "--N0", "8", "--N", "32"], dir.path());
    assert_eq!(code, 4);
    assert!(stderr.contains("capacity"));
}

#[test]
fn blowup_exits_3_with_last_state() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate3d", "--init", "random", "--amp", "1e6", "--resolution", "16", "--dt", "0.01", "--t-end", "1"];
    let (code, _) = nslab(&args, dir.path());
    assert_eq!(code, 3);
    let b = json(&dir.path().join("blowup.json"));
    assert!(b["time"].as_f64().unwrap() > 0.0);
    cgns::read(&dir.path().join("blowup_last_state.cgns")).unwrap();
}

#[test]
fn small_scan_writes_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scan", "--N", "16,32", "--intervals", "20", "--heat-points", "30"];
    assert_eq!(nslab(&args, dir.path()).0, 0);
    let text = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("slope"));
    let scan = json(&dir.path().join("scan.json"));
    assert!(scan["meta"]["config_sha256"].is_string());
}
