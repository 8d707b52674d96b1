use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toral-rigidity"))
        .args(args)
        .env("TORAL_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn run_config(cmd: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = configs().join(config);
    let mut args = vec![cmd, cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_cubic_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("analyze", "cubic_analyze.toml", dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("analyze.json"));
    assert_eq!(r["schema"], "toral-rigidity/analyze/1");
    assert_eq!(r["functionals"].as_array().unwrap().len(), 3);
    assert_eq!(r["chambers"].as_array().unwrap().len(), 6);
    for flag in ["maximal", "cartan", "tns", "full", "resonance_free"] {
        assert_eq!(r["predicates"][flag], true, "{flag}");
    }
    let svg = std::fs::read_to_string(dir.path().join("chambers.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<line").count(), 3);
    assert_eq!(svg.matches("text-anchor=\"middle\">(").count(), 6);
}

#[test]
fn analyze_identity_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("analyze", "identity.toml", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("analyze stage") && err.contains("Anosov"), "{err}");
}

#[test]
fn cat_product_is_not_tns_and_rigidity_refuses() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("analyze", "cat_product.toml", dir.path(), &[]);
    assert!(out.status.success());
    let r = read_json(&dir.path().join("analyze.json"));
    assert_eq!(r["predicates"]["tns"], false);
    assert!(!dir.path().join("chambers.svg").exists() || r["rank"] == 2);

    let out = run_config("rigidity", "cat_product.toml", dir.path(), &["--force"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("refused") && err.contains("tns: false"), "{err}");
    assert!(!dir.path().join("rigidity.json").exists());
}

#[test]
fn certify_coboundary_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("certify", "coboundary.toml", dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("certify.json"));
    assert_eq!(r["schema"], "toral-rigidity/certify/1");
    assert_eq!(r["passed"], true);
    assert_eq!(r["ph"]["all_certified"], true);
    assert_eq!(r["ph"]["chambers"].as_array().unwrap().len(), 6);
    assert!(r["bunching"]["margin"].as_f64().unwrap() < 1.0);
    assert_eq!(r["fixed_point"]["trivial"], true);
    let rob = &r["robustness"];
    assert!(rob["epsilon"].as_f64().unwrap() > 0.0);
    assert_eq!(rob["forced"].as_array().unwrap().len(), 9);
}

#[test]
fn reports_are_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    assert!(run_config("certify", "coboundary.toml", &a, &["--seed", "4"]).status.success());
    assert!(run_config("certify", "coboundary.toml", &b, &["--seed", "4"]).status.success());
    assert!(run_config("certify", "coboundary.toml", &c, &["--seed", "5"]).status.success());
    let ta = std::fs::read_to_string(a.join("certify.json")).unwrap();
    let tb = std::fs::read_to_string(b.join("certify.json")).unwrap();
    let tc = std::fs::read_to_string(c.join("certify.json")).unwrap();
    assert_eq!(ta, tb);
    let (va, vc): (Value, Value) = (serde_json::from_str(&ta).unwrap(), serde_json::from_str(&tc).unwrap());
    assert_eq!(va["seed"], 4);
    assert_eq!(vc["seed"], 5);
}

#[test]
fn rigidity_coboundary_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("rigidity", "coboundary.toml", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("rigidity.json"));
    assert_eq!(r["schema"], "toral-rigidity/rigidity/1");
    assert_eq!(r["within_tolerance"], true);
    assert_eq!(r["cover"]["index"], 1);
    let res = &r["residuals"];
    for key in ["section", "holonomy", "path", "constancy", "coboundary", "periodicity"] {
        assert!(res[key].as_f64().unwrap() < 1e-7, "{key}: {}", res[key]);
    }
    let rows = r["obstruction"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|row| row["max_rotation"].as_f64().unwrap() < 1e-8));
    assert!(r["cones"].as_array().unwrap().iter().all(|c| c["failure"].is_null()));
}

#[test]
fn rigidity_rotation_surfaces_fixed_point_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("rigidity", "rotation.toml", dir.path(), &[]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no fixed point with trivial fiber map"), "{err}");
    let r = read_json(&dir.path().join("rigidity.json"));
    assert_eq!(r["fixed_point_trivial"], false);
    assert!(r["coboundary"].is_null());
    let rot = r["constant_reduction"]["rotation_numbers"].as_array().unwrap();
    assert!(rot.iter().all(|v| (v.as_f64().unwrap() - 0.3).abs() < 1e-9));
    assert!(r["constant_reduction"]["defect"].as_f64().unwrap() < 1e-9);
}

#[test]
fn config_errors_carry_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[action]\ngenerators = [[[2, 1], [1, 1]]]\n\n[grids]\nbase = 16\nfiber = \"many\"\n").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6") && err.contains("fiber"), "{err}");

    std::fs::write(&path, "[action]\ngenerators = [[[2, 1], [1, 1]]]\n\n[tolerances]\ntol = 0.01\n").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tolerances.tol"), "{err}");
}

#[test]
fn report_to_stdout_without_out_dir() {
    let cfg = configs().join("cubic_analyze.toml");
    let out = run(&["analyze", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["chambers"].as_array().unwrap().len(), 6);
}
