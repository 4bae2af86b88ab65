//! External-contract tests for the binary: exit codes, schema rejection,
//! report hash checks, and the two artifact formats.

use std::path::Path;
use std::process::Output;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_homcell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

const MINIMAL: &str = r#"{
  "seed": 5,
  "constraint": { "shape": "ball", "rows": 1, "cols": 1, "radius": 1.0 },
  "integrand": {
    "coefficient": { "dimension": 1, "resolution": 2, "values": [1.0, 2.0] },
    "kernel": { "type": "quadratic", "weight": 1.0 }
  },
  "solver": { "restarts": 2 },
  "cell": { "xi_list": [[[0.5]]], "n_max": 1, "resolution": 16 },
  "density": { "xi_list": [[[0.5]], [[1.5]]], "truncation_indices": [2] }
}"#;

#[test]
fn unknown_keys_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    write(&cfg, &MINIMAL.replace("\"seed\": 5,", "\"seed\": 5, \"wat\": 1,"));
    let out = run(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn infeasible_gradient_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(&cfg, &MINIMAL.replace("[[[0.5]]], \"n_max\"", "[[[1.5]]], \"n_max\""));
    let out = run(&[
        "cell",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_section_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(&cfg, MINIMAL);
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_refuses_mixed_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let cfg_a = tmp.path().join("a.json");
    write(&cfg_a, MINIMAL);
    let cfg_b = tmp.path().join("b.json");
    write(&cfg_b, &MINIMAL.replace("\"seed\": 5", "\"seed\": 6"));
    assert!(run(&[
        "density",
        "--config",
        cfg_a.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "cell",
        "--config",
        cfg_b.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap()
    ])
    .status
    .success());
    let rep = run(&["report", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(rep.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&rep.stderr).contains("hash mismatch"));
}

#[test]
fn jsonl_format_and_infinity_literals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(&cfg, MINIMAL);
    let out_dir = tmp.path().join("o");
    assert!(run(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "json-lines"
    ])
    .status
    .success());
    let text = std::fs::read_to_string(out_dir.join("density.jsonl")).unwrap();
    let mut saw_infinite = false;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("valid json line");
        assert!(v["config_hash"].is_string());
        if v["W"] == serde_json::json!("+inf") {
            saw_infinite = true;
        }
    }
    assert!(saw_infinite, "the gauge-1.5 row must carry the +inf literal");
}

#[test]
fn csv_coefficient_path_loads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(&tmp.path().join("coeff.csv"), "1.0, 2.0\n");
    write(
        &cfg,
        &MINIMAL.replace(
            "\"values\": [1.0, 2.0]",
            "\"csv\": \"coeff.csv\"",
        ),
    );
    let out_dir = tmp.path().join("o");
    let out = run(&[
        "cell",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = std::fs::read_to_string(out_dir.join("cell_runlog.json")).unwrap();
    let log: serde_json::Value = serde_json::from_str(&log).unwrap();
    // Same laminate as the inline config: the oracle gap must be tiny.
    let gap = log["summary"]["points"][0]["oracle_relative_gap"]
        .as_f64()
        .unwrap();
    assert!(gap < 0.02, "oracle gap {gap}");
}

#[test]
fn no_partial_artifacts_on_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    // Infeasible gradient: the command fails after validation, before any
    // artifact write.
    write(&cfg, &MINIMAL.replace("[[[0.5]]], \"n_max\"", "[[[1.5]]], \"n_max\""));
    let out_dir = tmp.path().join("o");
    let out = run(&[
        "cell",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let leftovers: Vec<_> = std::fs::read_dir(&out_dir)
        .map(|rd| rd.map(|e| e.unwrap().path()).collect())
        .unwrap_or_default();
    assert!(leftovers.is_empty(), "partial artifacts: {leftovers:?}");
}
