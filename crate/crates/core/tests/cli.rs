//! End-to-end runs of the `corrsense` binary: subcommands, config loading,
//! flag overrides, exit codes, and output files.

use std::fs;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrsense"))
}

#[test]
fn phase_with_config_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("phase.toml");
    fs::write(
        &config_path,
        r#"
mode = "phase"
n = [16]
m = [12]
k = [1]
gamma_c = [0.25]
trials = 2
seed = 9

[lambda]
policy = "fixed"
values = [0.8]
"#,
    )
    .unwrap();
    let out_path = dir.path().join("phase.csv");
    let status = binary()
        .args(["phase", "--config"])
        .arg(&config_path)
        .args(["--seed", "42", "--jobs", "2", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# schema: corrsense-phase-v1\n"));
    assert!(text.contains("# seed: 42"), "CLI seed must override config");
    // 1 cell x 2 trials + comments + header
    let data_lines = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data_lines, 3);
}

#[test]
fn counterexample_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ce.csv");
    let output = binary()
        .args(["counterexample", "--n", "9", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("not recovered"));
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn certify_reports_soundness() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("certify.toml");
    fs::write(
        &config_path,
        r#"
mode = "certify"
n = [31]
m = [20]
k = [1]
gamma_c = [0.1]
trials = 3
seed = 4

[lambda]
policy = "fixed"
values = [0.7]
"#,
    )
    .unwrap();
    let out_path = dir.path().join("certify.csv");
    let output = binary()
        .args(["certify", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("soundness ok"), "stdout: {stdout}");
    assert!(out_path.exists());
}

#[test]
fn audit_writes_one_csv_per_audit() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("audit.toml");
    fs::write(
        &config_path,
        r#"
mode = "audit"
seed = 2

[lambda]
policy = "fixed"
values = [0.7]

[audit]
tail_trials = 500
deviation_trials = 20
deviation_n = 24
deviation_m = 12
golfing_runs = 3
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("audits");
    let status = binary()
        .args(["audit", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for name in ["steinhaus", "rademacher", "operator_deviation", "golfing"] {
        assert!(out_dir.join(format!("{name}.csv")).exists(), "{name} missing");
    }
}

#[test]
fn config_errors_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    fs::write(&config_path, "mode = \"phase\"\ntrials = 0\n").unwrap();
    let output = binary()
        .args(["phase", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("trials"));

    // theory mode rejects composite lengths
    let config_path = dir.path().join("composite.toml");
    fs::write(
        &config_path,
        "mode = \"phase\"\nn = [16]\ntheory_mode = true\n[lambda]\npolicy = \"fixed\"\nvalues = [0.7]\n",
    )
    .unwrap();
    let output = binary()
        .args(["phase", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("prime"));
}

#[test]
fn runtime_failures_exit_with_code_two() {
    // unwritable output path: the sweep runs but the write fails
    let output = binary()
        .args([
            "phase",
            "--trials",
            "1",
            "--out",
            "/nonexistent-dir/out.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
