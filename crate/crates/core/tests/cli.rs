use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn alv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alv"))
        .args(args)
        .env_remove("ALV_CONFIG")
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_standard_reports_al_margin() {
    let out = alv(&["verify", "--model", "sol:catmap", "--pair", "standard", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = report(&out);
    assert_eq!(doc["schema"], "alv-report/1");
    assert_eq!(doc["status"], "pass");
    let margin = doc["verify"]["margins"]["AL"]["margin"].as_f64().unwrap();
    assert!((margin - 3.8496946005).abs() < 1e-9);
    assert!(doc.get("timings").unwrap().as_object().unwrap().is_empty());
}

#[test]
fn verify_counterexample_is_al_but_not_linear() {
    let out = alv(&["verify", "--pair", "counterexample:A=1", "--deterministic"]);
    assert_eq!(out.status.code(), Some(1));
    let m = &report(&out)["verify"]["margins"];
    assert_eq!(m["AL"]["holds"], true);
    assert_eq!(m["lin_AL"]["holds"], false);
}

#[test]
fn pair_files() {
    let sl2 = format!("file:{}", fixture("sl2_standard.pair").display());
    let out = alv(&["verify", "--model", "sl2", "--pair", &sl2, "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verify"]["margins"]["AL"]["margin"].as_f64(), Some(4.0));

    let ce = format!("file:{}", fixture("catmap_counterexample.pair").display());
    let out = alv(&["verify", "--grid", "4", "--pair", &ce, "--deterministic"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = report(&out);
    let sigma = &doc["verify"]["sigma"];
    assert!((sigma["sigma_u"]["min"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((sigma["sigma_s"]["max"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    let bad = format!("file:{}", fixture("malformed.pair").display());
    let out = alv(&["verify", "--grid", "4", "--pair", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 9") && err.contains("2.71828x"), "{err}");

    let out = alv(&["verify", "--grid", "8", "--pair", &ce]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn homotopy_contract() {
    let out = alv(&["homotopy", "--tau-steps", "8", "--s-range", "0:5:128", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = report(&out);
    assert_eq!(doc["homotopy"]["sweep"]["pass"], true);
    assert_eq!(doc["homotopy"]["bump"]["samples"], 10000);

    let out = alv(&["homotopy", "--pair", "counterexample:A=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pair is not linear-Liouville"));

    let out = alv(&["homotopy", "--epsilon", "0.02"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dynamics_and_selftest() {
    let out = alv(&["dynamics", "--model", "sol:kappa=0.5", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let d = &report(&out)["dynamics"];
    assert!((d["lyapunov"]["lambda_u"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!((d["reparametrized"]["lambda_u"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let out = alv(&["selftest", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["selftest"]["pass"], true);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let args = ["verify", "--pair", "standard+conformal:0.1*sin(2*pi*t)", "--deterministic"];
    assert_eq!(alv(&args).stdout, alv(&args).stdout);
}

#[test]
fn outputs_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let csv_path = dir.path().join("fields.csv");
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "model = \"sl2\"\ndeterministic = true\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_alv"))
        .args(["verify", "--out", out_path.to_str().unwrap(), "--csv", csv_path.to_str().unwrap()])
        .env("ALV_CONFIG", &config)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["config"]["model"], "sl2");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().next(), Some("coefficient,value"));

    let out = alv(&["dump-fields", "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,coefficient,value"));
    assert_eq!(text.lines().count(), 1 + 12 * 8);

    let out = alv(&["models", "list"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("sol:kappa=K"));
    let out = alv(&["verify", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}
