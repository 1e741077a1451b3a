use std::path::Path;
use std::process::{Command, Output};

fn nsforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsforge")).args(args).env("NSFORGE_THREADS", "1").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn base_run(dir: &Path) {
    let out = dir.to_str().unwrap();
    let o = nsforge(&["run", "--qmax", "0", "--dump-fields", "--emit-images", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn base_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    base_run(dir.path());
    let rep: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["format"], "nsforge-run");
    assert_eq!(rep["pass"], true);
    for f in ["norms.csv", "paraproduct.csv", "state_0/u.sf2", "state_0/R.sf2", "state_0/state.json", "u_0_vorticity.pgm", "R_0_magnitude.pgm"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let pgm = std::fs::read(dir.path().join("u_0_vorticity.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
}

#[test]
fn check_accepts_dump_and_rejects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    base_run(dir.path());
    let state = dir.path().join("state_0");
    let o = nsforge(&["check", state.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let u = state.join("u.sf2");
    let mut bytes = std::fs::read(&u).unwrap();
    let last = bytes.len() - 9;
    bytes[last] ^= 0x55;
    std::fs::write(&u, bytes).unwrap();
    assert_eq!(code(&nsforge(&["check", state.to_str().unwrap()])), 4);
    assert_eq!(code(&nsforge(&["norms", u.to_str().unwrap()])), 4);
}

#[test]
fn norms_of_dumped_field() {
    let dir = tempfile::tempdir().unwrap();
    base_run(dir.path());
    let o = nsforge(&["norms", dir.path().join("state_0/R.sf2").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(!o.stdout.is_empty());
}

#[test]
fn mikado_and_probes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&nsforge(&["mikado", "--lambda", "16", "--out", out])), 0);
    assert_eq!(code(&nsforge(&["probe-hl", "--out", out])), 0);
    assert_eq!(code(&nsforge(&["probe-hhl", "--sweep", "4,16", "--out", out])), 0);
    for f in ["probe_hl.json", "probe_hhl.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(code(&nsforge(&["run", "--beta", "0", "--qmax", "0"])), 2);
    assert_eq!(code(&nsforge(&["run", "--eps-gamma", "abc"])), 2);
    assert_eq!(code(&nsforge(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[iteration]\nunknown = 1\n").unwrap();
    assert_eq!(code(&nsforge(&["run", "--config", cfg.to_str().unwrap()])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_nsforge")).args(["probe-hl"]).env("NSFORGE_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_state_exits_4() {
    assert_eq!(code(&nsforge(&["check", "/nonexistent/state"])), 4);
}
