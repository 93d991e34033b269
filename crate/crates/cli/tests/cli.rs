use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::{Command, Output};

use dq_core::transforms::io::{read_binary, read_csv};
use serde_json::Value;

fn dq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dq")).args(args).env_remove("DQ_THREADS").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dq-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn verify_geometry_emits_a_passing_report() {
    let o = dq(&["verify", "--suite", "geometry", "--suite", "algebra", "--n", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["report"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    for c in checks {
        for key in ["id", "anchor", "residual", "tolerance", "passed"] {
            assert!(c.get(key).is_some(), "missing {key} in {c}");
        }
    }
    assert!(checks.iter().any(|c| c["id"] == "geometry.triple"));
}

#[test]
fn verify_writes_to_out_and_reads_config() {
    let d = scratch("verify");
    let cfg = d.join("run.json");
    fs::write(&cfg, r#"{"n": 0, "suites": ["cochains"], "seed": 3, "samples": 50}"#).unwrap();
    let out = d.join("report.json");
    let o = dq(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["suites"][0], "cochains");
}

#[test]
fn configuration_errors_exit_two() {
    let d = scratch("config");
    let bad = d.join("bad.json");
    fs::write(&bad, r#"{"n": 0, "colour": "blue"}"#).unwrap();
    assert_eq!(code(&dq(&["verify", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&dq(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&dq(&["verify", "--bogus-flag"])), 2);
    assert_eq!(code(&dq(&["verify", "--suite", "geometry", "--theta", "0"])), 2);
    assert_eq!(code(&dq(&["verify", "--suite", "geometry", "--multiplier", "mystery"])), 2);
    assert_eq!(code(&dq(&["star", "--grid", "64"])), 2);
    assert_eq!(code(&dq(&["asym", "--theta", "0.2,0.1"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_dq")).args(["verify", "--suite", "geometry"]).env("DQ_THREADS", "0").output().unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_dq")).args(["verify", "--suite", "geometry"]).env("DQ_THREADS", "many").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn thread_count_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_dq")).args(["verify", "--suite", "geometry"]).env("DQ_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn failed_computation_exits_one() {
    let d = scratch("fail");
    let cfg = d.join("fat.json");
    fs::write(&cfg, r#"{"grid": {"points": 32, "min": -2, "max": 2}, "functions": [{"center": [0, 0], "width": 1.5}, {"center": [0, 0], "width": 1.5}]}"#).unwrap();
    let out = d.join("w.csv");
    let o = dq(&["star", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn star_writes_csv_binary_and_sidecar() {
    let d = scratch("star");
    let csv = d.join("w.csv");
    let bin = d.join("w.bin");
    for p in [&csv, &bin] {
        let o = dq(&["star", "--grid", "64", "--theta", "0.5", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = read_csv(BufReader::new(fs::File::open(&csv).unwrap())).unwrap();
    let b = read_binary(fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(a.spec(), b.spec());
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    let side: Value = serde_json::from_str(&fs::read_to_string(d.join("w.bin.json")).unwrap()).unwrap();
    assert_eq!(side["twist_parameter"], 0.25);
    assert_eq!(side["multiplier"], "one");
    assert!(side["kernel_constant"].is_null());

    let k = d.join("k.csv");
    let o = dq(&["star", "--grid", "64", "--route", "kernel", "--out", k.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side: Value = serde_json::from_str(&fs::read_to_string(d.join("k.csv.json")).unwrap()).unwrap();
    assert!((side["kernel_constant"].as_f64().unwrap() - std::f64::consts::PI.powi(-2)).abs() < 1e-15);
    let kk = read_csv(BufReader::new(fs::File::open(&k).unwrap())).unwrap();
    assert!(kk.rel_l2(&a).unwrap() < 1e-3);
}

#[test]
fn asym_writes_residual_table() {
    let d = scratch("asym");
    let out = d.join("a.csv");
    let o = dq(&["asym", "--grid", "128", "--theta", "0.2,0.1,0.05,0.025", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "theta,order,residual,fitted_slope,extrapolated_slope");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert!(r[4] > r[1] + 0.9, "{r:?}");
    }
}

#[test]
fn multiplier_presets_are_accepted() {
    let d = scratch("presets");
    let coeffs = d.join("c.csv");
    let mut text = String::from("xi,c1\n");
    for i in -80..=80 {
        let x = i as f64 * 0.25;
        text.push_str(&format!("{x},{}\n", (1.0 + x * x).ln()));
    }
    fs::write(&coeffs, text).unwrap();
    for preset in ["tracial", "tracial:0.2", &format!("borel:{}", coeffs.display())] {
        let out = d.join("w.bin");
        let o = dq(&["star", "--grid", "64", "--multiplier", preset, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{preset}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = dq(&["asym", "--grid", "128", "--multiplier", &format!("borel:{}", coeffs.display())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 9);
    assert_eq!(code(&dq(&["star", "--grid", "64", "--multiplier", "borel:/nonexistent/file.csv", "--out", "/tmp/x.bin"])), 2);
}
