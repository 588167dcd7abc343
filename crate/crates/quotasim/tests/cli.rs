//! End-to-end runs of the `quotasim` binary against config documents.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quotasim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[test]
fn boundary_prints_threshold_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "boundary.json",
        r#"{"command":"boundary","d_color":-0.5,"f":0.2}"#,
    );
    let output = run_cli(&["--config", config.to_str().unwrap()]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.trim(), "0.8333333333333334");
}

#[test]
fn boundary_domain_error_is_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "boundary.json",
        r#"{"command":"boundary","d_color":-0.5,"f":0.6}"#,
    );
    let output = run_cli(&["--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("domain"), "{stderr}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", r#"{"command": "simulate", "#);
    let output = run_cli(&["--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn unknown_fields_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "extra.json",
        r#"{"command":"simulate","n":100,"f":0.2,"d_color":0.0,"d_shape":0.0,"seed":1,"k":0.2,"typo_field":3}"#,
    );
    let output = run_cli(&["--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("typo_field"), "{stderr}");
}

#[test]
fn validation_failure_names_the_field_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "invalid.json",
        r#"{"command":"simulate","n":1000,"f":0.7,"d_color":0.0,"d_shape":0.0,"seed":1,"k":0.2}"#,
    );
    let out_path = dir.path().join("report.json");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("f must lie"), "{stderr}");
    assert!(!out_path.exists(), "no partial report may be left behind");
    assert!(!dir.path().join("report.json.tmp").exists());
}

#[test]
fn simulate_report_reproduces_paradox_signs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "fig1.json",
        r#"{"command":"simulate","n":10000,"f":0.2,"d_color":-0.5,"d_shape":1.5,"seed":42,"k":0.2,"format":"json"}"#,
    );
    let out_path = dir.path().join("fig1.json.out");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let bias = |side: &str, group: &str| -> f64 {
        doc["result"][side][group]["representation_bias"]
            .as_f64()
            .unwrap()
    };
    assert!(bias("blind", "orange_star") < 0.0);
    assert!(bias("quota_color", "orange_star") < bias("blind", "orange_star"));
    assert!(bias("quota_color", "green_circle") > bias("blind", "green_circle"));
    assert!(doc["result"]["quota_fairness"]["f_k"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn zero_bias_simulate_is_nearly_proportional() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "zero.json",
        r#"{"command":"simulate","n":5000,"f":0.2,"d_color":0.0,"d_shape":0.0,"seed":7,"k":0.2}"#,
    );
    let out_path = dir.path().join("zero.json.out");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    for group in ["green_star", "green_circle", "orange_star", "orange_circle"] {
        let b = doc["result"]["blind"][group]["representation_bias"]
            .as_f64()
            .unwrap();
        assert!(b.abs() < 0.1, "{group}: {b}");
    }
}

#[test]
fn identical_configs_give_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "rerun.json",
        r#"{"command":"sweep","axes":[{"param":"d_shape","min":0.4,"max":1.4,"steps":3}],
           "d_color":-0.5,"f":0.2,"k":0.2,"n":400,"reps":20,"master_seed":5,"format":"csv"}"#,
    );
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        let output = run_cli(&[
            "--config",
            config.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}

#[test]
fn seed_override_changes_the_draws() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "seeded.json",
        r#"{"command":"simulate","n":500,"f":0.2,"d_color":-0.5,"d_shape":1.5,"seed":1,"k":0.2}"#,
    );
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    let base = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_a.to_str().unwrap(),
    ]);
    assert!(base.status.success());
    let overridden = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_b.to_str().unwrap(),
        "--seed-override",
        "999",
    ]);
    assert!(overridden.status.success());
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_a).unwrap()).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_b).unwrap()).unwrap();
    assert_eq!(a["config"]["seed"], 1);
    assert_eq!(b["config"]["seed"], 999);
    assert_ne!(a["result"], b["result"]);
}

#[test]
fn invalid_thread_env_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sim.json",
        r#"{"command":"simulate","n":100,"f":0.2,"d_color":0.0,"d_shape":0.0,"seed":1,"k":0.2}"#,
    );
    let output = Command::new(env!("CARGO_BIN_EXE_quotasim"))
        .args(["--config", config.to_str().unwrap()])
        .env("QUOTASIM_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("QUOTASIM_THREADS"), "{stderr}");
}

#[test]
fn dataset_command_reports_all_sections() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = fixtures_dir().join("trec_shaped.spec.json");
    let config = write_config(
        dir.path(),
        "dataset.json",
        &format!(
            r#"{{"command":"dataset","spec":{:?},"k":0.2,"reps":50,"seed":3}}"#,
            spec_path.to_str().unwrap()
        ),
    );
    let out_path = dir.path().join("trec.json");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["n_rows"], 2751);
    assert!((doc["correlation_r"].as_f64().unwrap() - 0.10).abs() < 0.01);
    assert!(doc["fit"]["sigma"].as_f64().unwrap() > 0.0);
    // The already most underrepresented cell loses representation, and the
    // model approximation agrees on the sign.
    let delta = doc["delta_b_green_star"].as_f64().unwrap();
    let approx = doc["approximation"]["delta_b_green_star_mean"]
        .as_f64()
        .unwrap();
    assert!(delta < 0.0);
    assert!(approx < 0.0);
}

#[test]
fn dataset_schema_error_names_the_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("data.csv"), "a,b\n1,2\n").unwrap();
    let spec = write_config(
        dir.path(),
        "spec.json",
        r#"{
            "source": "data.csv",
            "quality_column": "missing_quality",
            "visible": {"column": "a", "rule": {"kind": "median_split"}},
            "hidden": {"column": "b", "rule": {"kind": "median_split"}}
        }"#,
    );
    let config = write_config(
        dir.path(),
        "dataset.json",
        r#"{"command":"dataset","spec":"spec.json"}"#,
    );
    let _ = spec;
    let output = run_cli(&["--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("missing_quality"), "{stderr}");
}

#[test]
fn csv_format_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sim.json",
        r#"{"command":"simulate","n":200,"f":0.25,"d_color":-0.5,"d_shape":1.0,"seed":2,"k":0.2,"format":"json"}"#,
    );
    let out_path = dir.path().join("report.csv");
    let output = run_cli(&[
        "--config",
        config.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("rule,group,group_size"));
    // 2 rules x 4 subgroups.
    assert_eq!(lines.count(), 8);
}
