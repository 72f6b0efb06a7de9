use std::path::PathBuf;
use std::process::{Command, Output};

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fermionic-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const STOKES: &[&str] = &[
    "--scenario", "stokes-rk", "--m", "3", "--k", "1", "--j", "1", "--radius", "1",
    "--center", "0.1,-0.2,0.05", "--quad-orders", "8,16", "--seed", "3", "--tol", "1e-4",
];

#[test]
fn json_report_has_the_documented_fields() {
    let path = scratch("stokes.json");
    let mut args = STOKES.to_vec();
    args.extend(["--format", "json", "--report", path.to_str().unwrap()]);
    let out = verify(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["scenario", "params", "lambda_used", "residuals", "pass", "wall_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["scenario"], "stokes-rk");
    assert_eq!(v["params"]["center"], serde_json::json!([0.1, -0.2, 0.05]));
    let residuals = v["residuals"].as_array().unwrap();
    assert_eq!(residuals.len(), 2);
    assert_eq!(residuals[1]["order"], 16);
    assert!(residuals[1]["relative"].as_f64().unwrap() < 1e-10);
}

#[test]
fn failing_tolerance_sets_the_exit_code() {
    let out = verify(&["--scenario", "cauchy", "--tol", "1e-300", "--quad-orders", "4,8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("[FAIL] cauchy"));
}

#[test]
fn invalid_parameters_are_rejected() {
    let out = verify(&["--scenario", "ladder", "--m", "4", "--k", "1", "--j", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerates"));
    let out = verify(&["--scenario", "stokes-rk", "--center", "0.9,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let run = || {
        let mut args = STOKES.to_vec();
        args.extend(["--format", "json"]);
        let out = verify(&args);
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn suite_file_runs_every_section() {
    let suite = concat!(env!("CARGO_MANIFEST_DIR"), "/suites/smoke.toml");
    let cache = scratch("cache");
    let out = verify(&["all", "--config", suite, "--cache-dir", cache.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}\n{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(text.matches("[PASS]").count(), 12);
    assert!(cache.join("lambda.json").exists());
    assert!(cache.join("family-m3-k1.json").exists());
}
