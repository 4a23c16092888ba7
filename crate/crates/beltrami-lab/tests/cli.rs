use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_beltrami-lab"))
}

#[test]
fn solve_succeeds_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["solve", "--field", "zero", "--grid-n", "64", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report.json").is_file());
    assert!(dir.path().join("mapping.qcm").is_file());
}

#[test]
fn op_failure_exits_one() {
    // shabat has no closed-form oracle, so oracle-compare fails as an op
    let out = bin()
        .args(["diagnose", "--field", "shabat:support=1", "--grid-n", "64"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("oracle-compare: error"), "stdout: {stdout}");
}

#[test]
fn config_error_exits_two() {
    let out = bin().args(["solve", "--grid-n", "100"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "boguskey = 1\n").unwrap();
    let out = bin().arg("solve").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("boguskey") && err.contains("line 1"), "stderr: {err}");
}

#[test]
fn env_var_overrides_output_dir() {
    let flag_dir = tempfile::tempdir().unwrap();
    let env_dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["criteria", "--field", "zero", "--ops", "lehto", "--output-dir"])
        .arg(flag_dir.path())
        .env("BELTRAMI_OUTPUT_DIR", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.path().join("report.json").is_file());
    assert!(!flag_dir.path().join("report.json").exists());
}

#[test]
fn rerun_reports_are_byte_identical() {
    let run = || -> Vec<u8> {
        let dir = tempfile::tempdir().unwrap();
        let status = bin()
            .args([
                "criteria",
                "--field",
                "kprofile:kind=log-inv,mode=radial",
                "--ops",
                "lehto,phi-divergence,remark11",
                "--output-dir",
            ])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.path().join("report.json")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn report_subcommand_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["criteria", "--field", "zero", "--ops", "lehto", "--output-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let out = bin().arg("report").arg(dir.path().join("report.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("lehto: ok"), "stdout: {stdout}");
    assert!(!Path::new("report.json").exists());

    let out = bin().args(["report", "no-such-file.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
