use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn nilprobe(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> (Output, Option<Value>) {
    let cfg = dir.join(format!("{sub}.config.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("{sub}.report.json"));
    let _ = std::fs::remove_file(&out);
    let output = Command::new(env!("CARGO_BIN_EXE_nilprobe"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(&out)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok());
    (output, report)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const MINIMAL: &str = r#"{
    "basis": {"√2": "auto"},
    "system": {"kind": "torus-flow", "freqs": ["1", "√2"]},
    "params": {"t": "1"}
}"#;

#[test]
fn minimal_time_one_map() {
    let dir = TempDir::new().unwrap();
    let (o, r) = nilprobe(dir.path(), "minimal", MINIMAL, &[]);
    assert_eq!(code(&o), 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["minimal"], Value::Bool(false));
    assert_eq!(r["operation"], "minimal");
    assert_eq!(r["seed"], 0);
    assert_eq!(r["config"]["system"]["kind"], "torus-flow");
    assert!(r.get("pass").is_none());
}

#[test]
fn diagonal_pair_witness() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "system": {"kind": "heisenberg-map", "generator": [0.4142135623730951, 0.7320508075688772, 0.0]},
        "params": {"x": [0.1, 0.2, 0.3], "y": [0.1, 0.2, 0.3], "d": 2, "delta": 0.05, "budget": 1000}
    }"#;
    let (o, r) = nilprobe(dir.path(), "rp-certify", cfg, &[]);
    assert_eq!(code(&o), 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["outcome"], "found");
    assert_eq!(r["result"]["witness"]["verified"], Value::Bool(true));
    assert_eq!(r["result"]["witness"]["g"].as_array().unwrap().len(), 2);
}

#[test]
fn commuting_rotations_clouds_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "seed": 5,
        "system": {"kind": "torus-map", "rotation": [0.4142135623730951]},
        "system_h": {"kind": "torus-map", "rotation": [0.7320508075688772]},
        "params": {"x": [0.0], "d": 1, "budget": 20000},
        "expect": {"hausdorff": {"max": 0.02}}
    }"#;
    let (o, r) = nilprobe(dir.path(), "nd-compare", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = r.unwrap();
    assert_eq!(r["pass"], Value::Bool(true));
    assert!(r["result"]["hausdorff"].as_f64().unwrap() <= 0.02);
}

#[test]
fn failed_expectation_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = MINIMAL.replace("\"params\"", "\"expect\": {\"minimal\": {\"equals\": true}}, \"params\"");
    let (o, r) = nilprobe(dir.path(), "minimal", &cfg, &[]);
    assert_eq!(code(&o), 1);
    let r = r.unwrap();
    assert_eq!(r["pass"], Value::Bool(false));
    assert_eq!(r["expectations"]["minimal"]["observed"], Value::Bool(false));
}

#[test]
fn schema_violations_exit_two() {
    let dir = TempDir::new().unwrap();
    let (o, r) = nilprobe(dir.path(), "minimal", r#"{"bogus": 1}"#, &[]);
    assert_eq!(code(&o), 2);
    assert!(r.is_none());
    let (o, _) = nilprobe(dir.path(), "cube", r#"{"operation": "potts"}"#, &[]);
    assert_eq!(code(&o), 2);
    let cfg = r#"{"system": {"kind": "torus-map", "rotation": [0.5]},
                  "params": {"x": [0.1], "y": [0.2], "d": 1, "delta": -1, "budget": 10}}"#;
    let (o, _) = nilprobe(dir.path(), "rp-certify", cfg, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_basis_product_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "basis": {"√2": "auto", "√3": "auto"},
        "system": {"kind": "torus-flow", "freqs": ["1", "√2"]},
        "params": {"t": "√3"}
    }"#;
    let (o, _) = nilprobe(dir.path(), "minimal", cfg, &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("√2·√3"));
}

#[test]
fn exhausted_search_exits_four_with_report() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "system": {"kind": "heisenberg-map", "generator": [0.4142135623730951, 0.7320508075688772, 0.0]},
        "params": {"x": [0.1, 0.2, 0.3], "y": [0.1, 0.2, 0.8], "d": 1, "delta": 0.01, "budget": 1}
    }"#;
    let (o, r) = nilprobe(dir.path(), "rp-certify", cfg, &[]);
    assert_eq!(code(&o), 4);
    let r = r.unwrap();
    assert_eq!(r["result"]["outcome"], "exhausted");
    assert!(r["exhausted"].is_string());
}

#[test]
fn unreadable_config_exits_six() {
    let o = Command::new(env!("CARGO_BIN_EXE_nilprobe"))
        .args(["minimal", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 6);
}

#[test]
fn missing_config_flag_exits_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_nilprobe"))
        .arg("minimal")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

fn payload(mut r: Value) -> String {
    r.as_object_mut().unwrap().remove("wall_time_s");
    r.to_string()
}

#[test]
fn equal_seeds_equal_payloads() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "seed": 11,
        "system": {"kind": "heisenberg-flow", "generator": [0.4142135623730951, 0.7320508075688772, 0.1]},
        "params": {"observable": {"kind": "cos", "k": [1, 1, 1]}, "alphas": [1, 2], "t": 0.7, "n_samples": 20000}
    }"#;
    let (o1, r1) = nilprobe(dir.path(), "average", cfg, &[]);
    let (o2, r2) = nilprobe(dir.path(), "average", cfg, &[]);
    assert_eq!((code(&o1), code(&o2)), (0, 0));
    let (r1, r2) = (r1.unwrap(), r2.unwrap());
    assert_eq!(r1["result"]["exact"], Value::Bool(false));
    assert_eq!(payload(r1.clone()), payload(r2));
    let (_, r3) = nilprobe(dir.path(), "average", cfg, &["--seed", "12"]);
    let r3 = r3.unwrap();
    assert_eq!(r3["seed"], 12);
    assert_ne!(r1["result"]["value"], r3["result"]["value"]);
}

#[test]
fn floats_use_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "system": {"kind": "torus-flow", "freqs": [1.0, 1.4142135623730951]},
        "params": {"observable": {"kind": "cos", "k": [1, -1]}, "alphas": [1], "t": 0.3}
    }"#;
    let (o, r) = nilprobe(dir.path(), "average", cfg, &[]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("average.report.json")).unwrap();
    assert!(text.contains("\"stderr\": 0.0000000000000000e0"), "{text}");
    let v = r.unwrap()["result"]["value"][0].as_f64().unwrap();
    let want = 0.5 * (2.0 * std::f64::consts::PI * 0.3 * (1.0 - 2f64.sqrt())).cos();
    assert!((v - want).abs() < 1e-14);
}

#[test]
fn artifacts_are_sibling_csvs() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "system": {"kind": "torus-map", "rotation": [0.4142135623730951]},
        "params": {"x": [0.0], "d": 2, "budget": 50}
    }"#;
    let (o, r) = nilprobe(dir.path(), "cube", cfg, &[]);
    assert_eq!(code(&o), 0);
    let r = r.unwrap();
    assert_eq!(r["artifacts"]["cloud"], "cube.report.cloud.csv");
    let csv = std::fs::read_to_string(dir.path().join("cube.report.cloud.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p0_0,p1_0,p2_0,p3_0"));
    assert_eq!(lines.count(), 50);
    assert_eq!(r["result"]["tuples"], 50);
}

#[test]
fn csv_report_format() {
    let dir = TempDir::new().unwrap();
    let (o, _) = nilprobe(dir.path(), "minimal", MINIMAL, &["--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("minimal.report.json")).unwrap();
    assert!(text.starts_with("path,value\n"));
    assert!(text.contains("\nresult.minimal,false\n"));
}

#[test]
fn sweeps_report_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "system": {"kind": "torus-map", "rotation": [0.4142135623730951]},
        "params": {"x": [0.3], "y": [0.3], "d": 1, "budget": 100},
        "sweep": {"param": "delta", "values": [0.2, 0.1, 0.05]},
        "expect": {"table.*.result.outcome": {"equals": "found"}}
    }"#;
    let (o, r) = nilprobe(dir.path(), "rp-certify", cfg, &[]);
    assert_eq!(code(&o), 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["table"].as_array().unwrap().len(), 3);
    assert_eq!(r["pass"], Value::Bool(true));
}

fn diagnostics(dir: &Path, cfg: &str) -> Vec<Value> {
    let (o, r) = nilprobe(dir, "validate", cfg, &[]);
    assert_eq!(code(&o), 0);
    r.unwrap()["result"]["diagnostics"].as_array().unwrap().clone()
}

#[test]
fn validate_examples() {
    let dir = TempDir::new().unwrap();
    let ok = MINIMAL.replace("{\n", "{\"operation\": \"minimal\",\n");
    assert!(diagnostics(dir.path(), &ok).is_empty());

    let repeated = r#"{"operation": "average",
        "system": {"kind": "torus-flow", "freqs": [1.0, 1.4142135623730951]},
        "params": {"observable": {"kind": "cos", "k": [1, 0]}, "alphas": [2, 2], "t": 1}}"#;
    let d = diagnostics(dir.path(), repeated);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["field"], "params.alphas");

    let unsupported = r#"{"operation": "minimal",
        "basis": {"√2": "auto", "√3": "auto"},
        "system": {"kind": "torus-flow", "freqs": ["1", "√2"]},
        "params": {"t": "√3"}}"#;
    let d = diagnostics(dir.path(), unsupported);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["kind"], "UNSUPPORTED-BASIS");
    assert!(d[0]["message"].as_str().unwrap().contains("√2·√3"));
}
