//! End-to-end checks of the `levylab` binary: subcommand wiring, exit codes,
//! catalog contents, and the shape of validation errors.

use std::path::PathBuf;
use std::process::{Command, Output};

fn levylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levylab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("levylab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_json(dir: &std::path::Path, name: &str, value: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    path
}

fn small_config(output: &std::path::Path) -> serde_json::Value {
    serde_json::json!({
        "experiment": "lamperti_roundtrip",
        "model": {"drift": -1.0, "sigma": 1.0, "jumps": []},
        "seed": 7,
        "replicates": 120,
        "step": 0.05,
        "output": output.to_string_lossy(),
    })
}

#[test]
fn list_names_the_full_catalog() {
    let out = levylab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    assert!(lines.len() >= 10, "catalog too small: {}", lines.len());
    assert!(text.contains("debt_time"));
    assert!(text.contains("theorem2_shift_at_max"));
}

#[test]
fn run_passes_and_writes_reports() {
    let dir = scratch("run");
    let out_dir = dir.join("out");
    let cfg = write_json(&dir, "cfg.json", &small_config(&out_dir));
    let out = levylab(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS"));
    assert!(out_dir.join("results.csv").exists());
    assert!(out_dir.join("summary.json").exists());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "lamperti_roundtrip");
    assert!(summary["wall_time_s"].as_f64().unwrap() >= 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_experiment_prints_catalog_and_fails() {
    let dir = scratch("unknown");
    let mut cfg = small_config(&dir.join("out"));
    cfg["experiment"] = serde_json::Value::String("not_a_thing".into());
    let path = write_json(&dir, "cfg.json", &cfg);
    let out = levylab(&["run", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("not_a_thing"));
    assert!(stderr.contains("debt_time"), "catalog missing from message: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_name_the_field() {
    let dir = scratch("field");
    let cases = [
        ("replicates", serde_json::json!(10)),
        ("step", serde_json::json!(0.0)),
        ("x_ladder", serde_json::json!([-1.0, -1.0])),
    ];
    for (field, bad) in cases {
        let mut cfg = small_config(&dir.join("out"));
        cfg[field] = bad;
        let path = write_json(&dir, "cfg.json", &cfg);
        let out = levylab(&["run", "--config", path.to_str().unwrap()]);
        assert!(!out.status.success());
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(stderr.contains(field), "error for `{field}` does not name it: {stderr}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validate_reports_model_quantities() {
    let dir = scratch("validate");
    let model = write_json(
        &dir,
        "model.json",
        &serde_json::json!({"drift": -2.0, "sigma": 1.0,
            "jumps": [{"rate": 1.0, "beta": 3.0, "sign": 1}]}),
    );
    let out = levylab(&["validate", "--model", model.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("theta"));
    assert!(text.contains('2'), "expected the root in: {text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validate_rejects_models_outside_the_family() {
    let dir = scratch("badmodel");
    // positive mean: no positive root of the exponent
    let model =
        write_json(&dir, "model.json", &serde_json::json!({"drift": 1.0, "sigma": 1.0, "jumps": []}));
    let out = levylab(&["validate", "--model", model.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("mean") || stderr.contains("drift"), "unhelpful error: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn worker_count_must_be_a_positive_integer() {
    let dir = scratch("workers");
    let cfg = write_json(&dir, "cfg.json", &small_config(&dir.join("out")));
    for bad in ["0", "many"] {
        let out = Command::new(env!("CARGO_BIN_EXE_levylab"))
            .args(["run", "--config", cfg.to_str().unwrap()])
            .env("LEVYLAB_WORKERS", bad)
            .output()
            .unwrap();
        assert!(!out.status.success());
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(stderr.contains("LEVYLAB_WORKERS"), "error does not name the variable: {stderr}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failing_experiment_exits_one() {
    let dir = scratch("fail");
    // An impossible model for this experiment: debt_time requires no
    // negative jumps, which surfaces as a run error (exit 2)...
    let mut cfg = small_config(&dir.join("out"));
    cfg["experiment"] = serde_json::Value::String("debt_time".into());
    cfg["model"] = serde_json::json!({"drift": -2.0, "sigma": 1.0,
        "jumps": [{"rate": 1.0, "beta": 3.0, "sign": -1}]});
    cfg["replicates"] = serde_json::Value::from(150);
    let path = write_json(&dir, "cfg.json", &cfg);
    let out = levylab(&["run", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    std::fs::remove_dir_all(&dir).ok();
}
