use std::path::Path;
use std::process::{Command, Output};

fn qtanner(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtanner"))
        .args(args)
        .current_dir(dir)
        .env("QTANNER_OUT_DIR", dir.join("out"))
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> serde_json::Value {
    let out = qtanner(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn fixture_bundle_round_trips_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let params = ok(dir.path(), &["fixture", "--name", "d4-36"]);
    assert_eq!(params["n"], 36);
    assert_eq!(params["k"], 8);
    let bundle = dir.path().join("out/d4-36");
    assert!(bundle.join("hx.alist").exists());
    let report = ok(dir.path(), &["check", "--code", bundle.to_str().unwrap()]);
    assert_eq!(report["ok"], true);
    assert_eq!(report["expected_n"], 36);
}

#[test]
fn construct_writes_a_valid_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("code");
    let params = ok(
        dir.path(),
        &["construct", "--group", "6", "--delta", "3", "--seed", "4", "--out", out.to_str().unwrap()],
    );
    assert_eq!(params["n"], 54);
    let report = ok(dir.path(), &["check", "--code", out.to_str().unwrap()]);
    assert_eq!(report["ok"], true);
}

#[test]
fn distance_with_exhaustive_search() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(
        dir.path(),
        &["distance", "--code", "d4-36", "--trials", "200", "--exhaustive", "2"],
    );
    assert_eq!(v["estimate"]["d_upper"], 3);
    assert!(v["exhaustive"].is_null());
}

#[test]
fn simulate_appends_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let out = qtanner(
            dir.path(),
            &["simulate", "--code", "d4-36", "--model", "phenom", "--p", "0.01,0.02", "--shots", "64", "--seed", seed],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "code,model,p,rounds,shots_x,shots_z,fails_x,fails_z,L_X,L_Z,p_L,ci,seed");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("d4-36,phenom,0.01,3,64,64,"));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"seed": 3, "bp": {"max_iters": 12}, "osd": {"order": 2},
            "simulate": {"model": "capacity", "p": [0.05], "shots": 32, "csv": "mine.csv"}}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    let out = qtanner(dir.path(), &["--config", cfg, "simulate", "--code", "d4-36", "--shots", "16"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let row: serde_json::Value = serde_json::from_slice(out.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(row["x"]["shots"], 16);
    assert_eq!(row["seed"], 3);
    assert_eq!(row["model"]["kind"], "code-capacity");
    assert!(dir.path().join("mine.csv").exists());

    std::fs::write(&config, r#"{"no_such_flag": 1}"#).unwrap();
    let out = qtanner(dir.path(), &["--config", cfg, "overhead", "--code", "d4-36"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-flag"));
}

#[test]
fn overhead_reports_published_value() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(dir.path(), &["overhead", "--code", "d4-36"]);
    assert_eq!(v["overhead"]["o_st"], 68 * 12 * 3);
    assert_eq!(v["published_per_logical"], 612.0);
}

#[test]
fn spectra_from_fixture_and_from_generators_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(dir.path(), &["spectra", "--code", "d4-36"]);
    let b = ok(dir.path(), &["spectra", "--group", "4", "--a", "s,r,r^3", "--b", "sr,sr^3,r^2"]);
    assert_eq!(a, b);
    assert_eq!(a["spectral"]["bound_holds"], true);
}

#[test]
fn threshold_without_crossing_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = qtanner(
        dir.path(),
        &["threshold", "--code", "d4-36", "--model", "capacity", "--lo", "0.0001", "--hi", "0.0002", "--shots", "16"],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sign change"));
}

#[test]
fn sweep_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(
        dir.path(),
        &["sweep", "--groups", "4", "--deltas", "3", "--targets", "3x2", "--instances", "2", "--trials", "20"],
    );
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert!(dir.path().join("out/sweep.json").exists());
}

#[test]
fn unknown_code_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qtanner(dir.path(), &["check", "--code", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("neither a fixture"));
}
