//! Black-box tests of the coherelab binary.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_coherelab");

fn qubit_plus() -> String {
    format!("{}/fixtures/qubit_plus.json", env!("CARGO_MANIFEST_DIR"))
}

fn qutrit_example() -> String {
    format!("{}/fixtures/qutrit_example.json", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("COHERELAB_THREADS", "2")
        .output()
        .expect("binary should run")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

#[test]
fn measure_all_on_qubit_plus() {
    let out = run(&["measure", "--state", &qubit_plus(), "--all"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let obj = v.as_object().unwrap();
    assert_eq!(obj.len(), 14);
    let get = |name: &str| obj[name]["value"].as_f64().unwrap();
    assert!((get("c_l1") - 1.0).abs() < 1e-9);
    assert!((get("c_rel_ent") - 1.0).abs() < 1e-9);
    assert!((get("c_max") - 1.0).abs() < 1e-6);
    assert!((get("c_robustness") - 1.0).abs() < 1e-6);
    assert!((get("c_guess") - 0.5).abs() < 1e-6);
    assert!((get("c_i_upper") - 1.0).abs() < 1e-9);
}

#[test]
fn measure_subset_on_qutrit_example() {
    let out = run(&["measure", "--state", &qutrit_example(), "--only", "c_l1,c_max"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let obj = v.as_object().unwrap();
    assert_eq!(obj.len(), 2);
    assert!((obj["c_l1"]["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    assert!((obj["c_max"]["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-4);
}

#[test]
fn malformed_state_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let out = run(&["measure", "--state", path.to_str().unwrap(), "--all"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn non_psd_state_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"dim":2,"matrix":[[[0.2,0.0],[0.6,0.0]],[[0.6,0.0],[0.8,0.0]]]}"#,
    )
    .unwrap();
    let out = run(&["measure", "--state", path.to_str().unwrap(), "--all"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_measure_name_is_a_validation_error() {
    let out = run(&["measure", "--state", &qubit_plus(), "--only", "c_bogus"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn pattern_sweep_rows_are_distributions() {
    let out = run(&["pattern", "--state", &qutrit_example(), "--grid", "33", "--axis", "2"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "alpha_1,alpha_2,alpha_3,p_0,p_1,p_2");
    let mut rows = 0;
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields.len(), 6);
        let total: f64 = fields[3..].iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "row sums to {total}");
        rows += 1;
    }
    assert_eq!(rows, 33);
}

#[test]
fn pattern_custom_basis_matches_expected_value() {
    // projective measurement in the path basis: the pattern is flat in the phase
    let basis = r#"basis:[[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]"#;
    let out = run(&["pattern", "--state", &qutrit_example(), "--povm", basis, "--grid", "5"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        for p in &fields[3..] {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }
}

#[test]
fn random_state_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "random-state",
            "--dim",
            "3",
            "--rank",
            "3",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let out = run(&["measure", "--state", a.to_str().unwrap(), "--only", "c_l1"]);
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn maximally_coherent_state_has_full_l1_coherence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.json");
    let out = run(&[
        "random-state",
        "--dim",
        "3",
        "--maximally-coherent",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let out = run(&["measure", "--state", path.to_str().unwrap(), "--only", "c_l1"]);
    let v = stdout_json(&out);
    assert!((v["c_l1"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn suite_clean_config_reports_success_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"dimensions":[2,3],"trials":5,"seed":11,"measures":["c_guess"],"tolerance":1e-6}"#,
    )
    .unwrap();
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for path in [&r1, &r2] {
        let out = run(&[
            "suite",
            "--config",
            config.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap(), "reports differ between runs");
    let report: Value = serde_json::from_slice(&fs::read(&r1).unwrap()).unwrap();
    assert_eq!(report["summary"]["total"].as_u64().unwrap(), 10);
    assert_eq!(report["summary"]["failures"].as_u64().unwrap(), 0);
}

#[test]
fn suite_with_unknown_measure_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"measures":["c_bogus"],"trials":1}"#).unwrap();
    let out = run(&["suite", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn suite_surfaces_monotonicity_failures_with_exit_4() {
    // branch-wise monotonicity of the gradient measures fails on random
    // channels often enough that 40 qutrit trials reliably catch it
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"dimensions":[3],"trials":40,"seed":0,"measures":["c_nabla_2"],"tolerance":1e-6}"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "suite",
        "--config",
        config.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("monotonicity failure"), "stderr: {stderr}");
    assert!(stderr.contains("state_seed="), "stderr lacks reproduction data: {stderr}");
}
