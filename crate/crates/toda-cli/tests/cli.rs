use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn toda(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_toda"));
    cmd.args(args).env_remove("TODA_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("TODA_OUT_DIR", d);
    }
    cmd.output().expect("run toda")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn spectrum_ground_state_matches_oracle() {
    let out = toda(&["spectrum", "--lambda", "0.3"], None);
    assert!(out.status.success());
    let v = json(&out);
    let row = &v["results"][0];
    assert!(row["oracle"]["relative_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["meta"]["command"], "spectrum");
}

#[test]
fn rerun_is_byte_identical() {
    let args = ["spectrum", "--modes", "[[0,0],[1,0]]"];
    let a = toda(&args, None);
    let b = toda(&args, None);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn negative_coupling_is_a_config_error() {
    let out = toda(&["spectrum", "--lambda", "-1"], None);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
}

#[test]
fn sigma_collision_is_rejected() {
    let out = toda(&["rh-map", "--n", "3", "--sigma", "[[0.2,0],[0.2,0],[-0.4,0]]"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("σ collision"));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"lambda": 0.3, "colour": "red"}"#).unwrap();
    let out = toda(&["spectrum", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"lambda": 0.15, "sigma": [[0, 0.4], [0, -0.4]]}"#).unwrap();
    let out = toda(&["rh-map", "--config", cfg.to_str().unwrap(), "--lambda", "0.3"], None);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["inputs"]["lambda"], 0.3);
    assert!(v["results"][0]["eigenvalue_mismatch"].as_f64().unwrap() < 1e-6);
}

#[test]
fn csv_has_header_and_one_line_per_state() {
    let out = toda(&["spectrum", "--format", "csv", "--modes", "[[0,0],[1,0]]"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].split(',').any(|h| h == "oracle.relative_deviation"));
}

#[test]
fn out_dir_variable_sets_default_destination() {
    let dir = tempfile::tempdir().unwrap();
    let out = toda(&["monodromy"], Some(dir.path()));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("monodromy.json")).unwrap()).unwrap();
    assert_eq!(v["results"][0]["quantized"], true);
}

#[test]
fn yangyang_identities_hold() {
    let out = toda(&["yangyang", "--delta", "[[0.3,0],[-0.3,0]]"], None);
    assert!(out.status.success());
    assert_eq!(json(&out)["results"][0]["passed"], true);
}

fn failed(v: &Value) -> Vec<String> {
    v["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .map(|r| r["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn verify_passes_and_detects_injected_faults() {
    let out = toda(&["verify"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(failed(&json(&out)).is_empty());

    let out = toda(&["verify", "--flip-stokes-sign"], None);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(failed(&json(&out)), ["char_poly_m0"]);

    let out = toda(&["verify", "--grid-m", "3", "--grid-tail-nodes", "4"], None);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(failed(&v), ["nlie_grid_stability"]);
    let row = v["results"].as_array().unwrap().iter().find(|r| r["name"] == "nlie_grid_stability").unwrap();
    assert!(row["detail"]["error"].as_str().unwrap().contains("decay"));
}
