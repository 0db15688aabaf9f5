//! End-to-end checks of the binary: exit codes, byte-stable data files, and
//! schema conformance of the emitted JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bogflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bogflow"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bogflow-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const MINIMAL: &str = r#"{
  "N": 40, "d": 1, "L": 1.0,
  "pairs": [{"j": [1], "eps": 0.1}]
}"#;

fn run(args: &[&str]) -> Output {
    bogflow().args(args).output().unwrap()
}

#[test]
fn three_mode_passes_and_exits_zero() {
    let dir = tmp_dir("three-mode");
    let cfg = write_config(&dir, "cfg.json", MINIMAL);
    let out_dir = dir.join("out");
    let out = run(&[
        "three-mode",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("three-mode.json").exists());
    assert!(out_dir.join("three-mode_three_mode.csv").exists());
    assert!(out_dir.join("run_meta.json").exists());
}

#[test]
fn identical_configs_give_byte_identical_data_files() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "cfg.json", MINIMAL);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "three-mode",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["three-mode.json", "three-mode_three_mode.csv"] {
        let a = fs::read(out_a.join(file)).unwrap();
        let b = fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn csv_format_contract() {
    let dir = tmp_dir("csv");
    let cfg = write_config(&dir, "cfg.json", MINIMAL);
    let out_dir = dir.join("out");
    run(&[
        "three-mode",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(!out_dir.join("three-mode.json").exists());
    let body = fs::read_to_string(out_dir.join("three-mode_three_mode.csv")).unwrap();
    // header row, LF endings, documented column order
    assert!(body.starts_with(
        "pair,k2,phi,eps,e_bog,z_star,lambda_min,abs_diff,rel_diff,iterations,residual\n"
    ));
    assert!(!body.contains('\r'));
}

#[test]
fn invalid_config_exits_one_with_field_message() {
    let dir = tmp_dir("invalid");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{"N": 41, "d": 1, "L": 1.0, "pairs": [{"j": [1], "eps": 0.1}]}"#,
    );
    let out = run(&["three-mode", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("even"), "{stderr}");
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["three-mode", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_invariant_exits_two() {
    // a reversed N scan makes the strictly-decreasing convergence check fail
    let dir = tmp_dir("exit2");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
            "N": 100, "d": 1, "L": 1.0,
            "pairs": [{"j": [1], "eps": 0.1}],
            "scans": {"n_values": [100, 50]}
        }"#,
    );
    let out = run(&[
        "convergence",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_subcommand_exits_one() {
    let dir = tmp_dir("unknown");
    let cfg = write_config(&dir, "cfg.json", MINIMAL);
    let out = run(&["frobnicate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn threads_env_does_not_change_output() {
    let dir = tmp_dir("threads");
    let cfg = write_config(
        &dir,
        "cfg.json",
        r#"{
            "N": 50, "d": 1, "L": 1.0,
            "pairs": [{"j": [1], "eps": 0.1}],
            "scans": {"n_values": [50, 100, 200]}
        }"#,
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let mut cmd = bogflow();
    cmd.env("BOGFLOW_THREADS", "4");
    let out = cmd
        .args([
            "convergence",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_a.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bogflow()
        .env("BOGFLOW_THREADS", "1")
        .args([
            "convergence",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_b.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read(out_a.join("convergence.json")).unwrap(),
        fs::read(out_b.join("convergence.json")).unwrap()
    );
}

// ---- light structural validation against the shipped report schema ----

fn validate(schema: &serde_json::Value, value: &serde_json::Value, path: &str) -> Vec<String> {
    use serde_json::Value;
    let mut errors = Vec::new();
    if let Some(types) = schema.get("type") {
        let allowed: Vec<&str> = match types {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) => {
                if n.is_i64() || n.is_u64() {
                    "integer"
                } else {
                    "number"
                }
            }
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let ok = allowed.iter().any(|&t| {
            t == actual || (t == "number" && actual == "integer")
        });
        if !ok {
            errors.push(format!("{path}: expected {allowed:?}, got {actual}"));
            return errors;
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        for key in required.iter().filter_map(|k| k.as_str()) {
            if value.get(key).is_none() {
                errors.push(format!("{path}: missing required key {key}"));
            }
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(|p| p.as_object());
        let additional = schema.get("additionalProperties");
        for (key, val) in obj {
            let sub = props.and_then(|p| p.get(key));
            match sub {
                Some(subschema) => {
                    errors.extend(validate(subschema, val, &format!("{path}.{key}")));
                }
                None => match additional {
                    Some(serde_json::Value::Bool(false)) => {
                        errors.push(format!("{path}: unexpected key {key}"));
                    }
                    Some(subschema) if subschema.is_object() => {
                        errors.extend(validate(subschema, val, &format!("{path}.{key}")));
                    }
                    _ => {}
                },
            }
        }
    }
    if let (Some(arr), Some(items)) = (value.as_array(), schema.get("items")) {
        for (idx, item) in arr.iter().enumerate() {
            errors.extend(validate(items, item, &format!("{path}[{idx}]")));
        }
    }
    errors
}

#[test]
fn report_validates_against_shipped_schema() {
    let dir = tmp_dir("schema");
    let cfg = write_config(&dir, "cfg.json", MINIMAL);
    let out_dir = dir.join("out");
    let out = run(&[
        "three-mode",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("three-mode.json")).unwrap())
            .unwrap();
    let errors = validate(&schema, &report, "$");
    assert!(errors.is_empty(), "{errors:#?}");
    // the schema itself pins version 1
    assert_eq!(report["schema_version"], "1");
}

#[test]
fn config_examples_validate_against_config_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/config.schema.json")).unwrap();
    for body in [
        MINIMAL,
        r#"{"N": 20, "d": 1, "L": 1.0, "phi0": 1.5,
            "pairs": [{"j": [1], "eps": 0.1}, {"j": [2], "phi": 100.0}],
            "truncation": {"h": 4, "jbar": 4, "zeta": 0.1, "dn0": 1.0},
            "scans": {"n_values": [20, 40]},
            "oracle": {"include_v": true, "basis_cap": 10000}}"#,
    ] {
        let value: serde_json::Value = serde_json::from_str(body).unwrap();
        let errors = validate(&schema, &value, "$");
        assert!(errors.is_empty(), "{errors:#?}");
    }
}
