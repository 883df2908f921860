//! Exit codes and artifacts of the `isolab` binary.

use std::process::Command;

fn isolab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isolab"))
}

#[test]
fn malformed_config_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"packing\"\n[parameters\n").unwrap();
    let out = dir.path().join("out.csv");
    let status = isolab().arg("packing").arg("--config").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(!out.exists());
    assert!(std::fs::read_dir(dir.path()).unwrap().count() == 1);
}

#[test]
fn precondition_exit_cites_the_bound() {
    let out = isolab().args(["converge", "radii=[0.3]", "epsilon_target=0.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("F_K(eps, eps, eps)"), "{msg}");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ricci.toml");
    let out = dir.path().join("ricci.csv");
    std::fs::write(&cfg, format!("experiment = \"ricci-check\"\nseed = 5\noutput = {:?}\n[parameters]\nn = 3\n", out)).unwrap();
    let status = isolab().arg("ricci-check").arg("--config").arg(&cfg).arg("flat").status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed 5"));
    assert!(text.lines().any(|l| l.ends_with(",26,27,VIOLATED")), "{text}");
    // A config for another experiment is refused.
    let status = isolab().arg("packing").arg("--config").arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn threads_from_environment() {
    let out = isolab().args(["fk-table", "flat"]).env("ISOLAB_THREADS", "1").output().unwrap();
    assert!(out.status.success());
    let bad = isolab().args(["fk-table"]).env("ISOLAB_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
