use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use zeno_core::runner::{NEUTRON_CSV_HEADER, STEP_OVERRIDE_ENV};

const ION: &str =
    "[ion]\nomega = 3.141592653589793\ntau_sp = 0.01\n\n[sweep]\nn_list = [1, 2, 4]\n";

fn zeno_sim() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zeno-sim"));
    cmd.env_remove(STEP_OVERRIDE_ENV);
    cmd
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    zeno_sim()
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_accepts_good_config() {
    let dir = TempDir::new().unwrap();
    let out = run(&["validate"], &write_config(&dir, ION));
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "ok");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["validate"],
        &write_config(&dir, &format!("{ION}\n[output]\ncolour = \"red\"\n")),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn negative_parameter_names_its_field() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["validate"],
        &write_config(&dir, "[ion]\nomega = -1.0\ntau_sp = 0.01\n"),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ion.omega"));
}

#[test]
fn n_list_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let out = run(&["ion", "--n-list", "8,3"], &write_config(&dir, ION));
    assert!(out.status.success());
    let text = stdout(&out);
    let ns: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ns, ["3", "8"]);
}

#[test]
fn json_output_carries_metadata() {
    let dir = TempDir::new().unwrap();
    let out = run(&["ion", "--format", "json"], &write_config(&dir, ION));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["metadata"]["n_list"], serde_json::json!([1, 2, 4]));
    assert_eq!(v["metadata"]["n_max"], 100);
    assert!(v["metadata"]["timestamp"].is_string());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["p2_lindblad"].is_null());
    assert!((rows[2]["p2_projection"].as_f64().unwrap() - 0.375).abs() < 1e-12);
}

#[test]
fn neutron_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[neutron]\ndelta_e_m = 0.4\ndelta_e_k = 1.0\n\n[sweep]\nn_list = [1, 15, 16]\n",
    );
    let out = run(&["neutron"], &cfg);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], NEUTRON_CSV_HEADER);
    assert!(
        lines[2].starts_with("15,") && lines[2].ends_with(",valid"),
        "{}",
        lines[2]
    );
    assert!(lines[3].ends_with(",ill-defined"), "{}", lines[3]);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("rows.csv");
    let out = zeno_sim()
        .args(["ion", "--out"])
        .arg(&target)
        .arg("--config")
        .arg(write_config(&dir, ION))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&target).unwrap().lines().count(), 4);
}

#[test]
fn sequential_matches_parallel() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, ION);
    let a = run(&["ion", "--n-list", "1,2,3,5,8,13,21"], &cfg);
    let b = run(
        &["ion", "--n-list", "1,2,3,5,8,13,21", "--sequential"],
        &cfg,
    );
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn lindblad_check_reports_max_deviation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "[ion]\nomega = 3.141592653589793\ntau_sp = 0.025\n\n[schedule]\npulse_fraction = 0.01\n\n[sweep]\nn_list = [2]\n",
    );
    let out = run(&["lindblad-check"], &cfg);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("n=2 ")), "{text}");
    assert!(
        text.lines().last().unwrap().starts_with("max_deviation="),
        "{text}"
    );
    assert!(out.status.success(), "{text}");
}

#[test]
fn oversized_step_override_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = zeno_sim()
        .env(STEP_OVERRIDE_ENV, "0.5")
        .args(["ion", "--lindblad", "--config"])
        .arg(write_config(&dir, ION))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_config_file() {
    let out = zeno_sim()
        .args(["validate", "--config", "/nonexistent/zeno.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
