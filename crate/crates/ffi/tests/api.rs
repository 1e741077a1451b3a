use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use nsforge_ffi::*;

fn last_error() -> String {
    let n = unsafe { nsf_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; n];
    unsafe { nsf_last_error(buf.as_mut_ptr(), n) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(nsf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn gamma_of_identity() {
    let mut g = [0.0f64; 3];
    assert_eq!(unsafe { nsf_gamma_squared(1.0, 0.0, 1.0, g.as_mut_ptr()) }, NsfStatus::Ok);
    for (a, b) in g.iter().zip([7.0 / 8.0, 25.0 / 16.0, 25.0 / 16.0]) {
        assert!((a - b).abs() < 1e-12, "{g:?}");
    }
    assert_eq!(unsafe { nsf_gamma_squared(5.0, 0.0, 1.0, g.as_mut_ptr()) }, NsfStatus::Numerical);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { nsf_gamma_squared(1.0, 0.0, 1.0, ptr::null_mut()) }, NsfStatus::NullPointer);
}

#[test]
fn base_field_norms_and_round_trip() {
    let mut u: *mut NsfField = ptr::null_mut();
    assert_eq!(unsafe { nsf_base_velocity(2.0, &mut u) }, NsfStatus::Ok);
    let (mut n, mut c, mut b) = (0usize, 0usize, 0usize);
    assert_eq!(unsafe { nsf_field_info(u, &mut n, &mut c, &mut b) }, NsfStatus::Ok);
    assert_eq!(c, 2);
    assert_eq!(b, 1);
    let mut l2 = 0.0;
    assert_eq!(unsafe { nsf_field_lp_norm(u, 2.0, &mut l2) }, NsfStatus::Ok);
    assert!((l2 - 2.0 / 2f64.sqrt()).abs() < 1e-12, "{l2}");
    let mut linf = 0.0;
    assert_eq!(unsafe { nsf_field_lp_norm(u, f64::INFINITY, &mut linf) }, NsfStatus::Ok);
    assert!((linf - 2.0).abs() < 1e-12);
    assert_eq!(unsafe { nsf_field_lp_norm(u, 0.5, &mut linf) }, NsfStatus::InvalidArgument);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("u.sf2").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { nsf_field_save(u, path.as_ptr()) }, NsfStatus::Ok);
    let mut v: *mut NsfField = ptr::null_mut();
    assert_eq!(unsafe { nsf_field_load(path.as_ptr(), &mut v) }, NsfStatus::Ok);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    unsafe {
        nsf_field_sobolev_norm(u, -2.0, &mut s1);
        nsf_field_sobolev_norm(v, -2.0, &mut s2);
    }
    assert_eq!(s1.to_bits(), s2.to_bits());
    unsafe {
        nsf_field_free(u);
        nsf_field_free(v);
        nsf_field_free(ptr::null_mut());
    }

    let missing = CString::new(dir.path().join("none.sf2").to_str().unwrap()).unwrap();
    let mut w: *mut NsfField = ptr::null_mut();
    assert_eq!(unsafe { nsf_field_load(missing.as_ptr(), &mut w) }, NsfStatus::Io);
    assert!(w.is_null());
}

#[test]
fn base_only_run() {
    let cfg = CString::new("[iteration]\nqmax = 0\n").unwrap();
    let mut r: *mut NsfRun = ptr::null_mut();
    assert_eq!(unsafe { nsf_run(cfg.as_ptr(), &mut r) }, NsfStatus::Ok, "{}", last_error());
    let mut pass: c_int = 0;
    let mut steps = 9u32;
    assert_eq!(unsafe { nsf_run_summary(r, &mut pass, &mut steps) }, NsfStatus::Ok);
    assert_eq!(pass, 1);
    assert_eq!(steps, 0);
    assert_eq!(unsafe { nsf_run_step(r, 0, ptr::null_mut(), ptr::null_mut()) }, NsfStatus::InvalidArgument);

    let mut need = 0usize;
    assert_eq!(unsafe { nsf_run_report_json(r, ptr::null_mut(), 0, &mut need) }, NsfStatus::Ok);
    let mut small = vec![0 as c_char; 4];
    assert_eq!(unsafe { nsf_run_report_json(r, small.as_mut_ptr(), 4, &mut need) }, NsfStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; need];
    assert_eq!(unsafe { nsf_run_report_json(r, buf.as_mut_ptr(), need, ptr::null_mut()) }, NsfStatus::Ok);
    let json = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(json.contains("\"nsforge-run\""));

    let mut u: *mut NsfField = ptr::null_mut();
    assert_eq!(unsafe { nsf_run_field(r, 0, &mut u) }, NsfStatus::Ok);
    assert_eq!(unsafe { nsf_run_field(r, 7, &mut u) }, NsfStatus::InvalidArgument);
    unsafe {
        nsf_field_free(u);
        nsf_run_free(r);
    }
}

#[test]
fn bad_config_is_rejected() {
    let cfg = CString::new("[iteration]\nbogus = 1\n").unwrap();
    let mut r: *mut NsfRun = ptr::null_mut();
    assert_eq!(unsafe { nsf_run(cfg.as_ptr(), &mut r) }, NsfStatus::InvalidArgument);
    assert!(r.is_null());
    assert!(last_error().contains("bogus"));
    assert_eq!(unsafe { nsf_run(ptr::null(), &mut r) }, NsfStatus::NullPointer);
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nsforge.h")).unwrap();
    for name in [
        "nsf_version", "nsf_last_error", "nsf_field_load", "nsf_field_save", "nsf_base_velocity", "nsf_base_stress",
        "nsf_field_info", "nsf_field_sobolev_norm", "nsf_field_lp_norm", "nsf_field_free", "nsf_gamma_squared",
        "nsf_run", "nsf_run_summary", "nsf_run_step", "nsf_run_report_json", "nsf_run_field", "nsf_run_free",
        "typedef struct NsfField NsfField", "NSF_STATUS_OK = 0", "NSF_STATUS_IO = 4",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_staticlib() {
    let lib = target_dir().join("libnsforge_ffi.a");
    let cc = Command::new("cc").arg("--version").output();
    if !lib.exists() || cc.is_err() {
        eprintln!("skipped: no C compiler or staticlib");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "nsforge.h"
int main(void) {
    double g[3];
    if (nsf_gamma_squared(1.0, 0.0, 1.0, g) != NSF_STATUS_OK) return 1;
    NsfField *u = NULL;
    if (nsf_base_velocity(1.0, &u) != NSF_STATUS_OK) return 2;
    double s = 0.0;
    if (nsf_field_sobolev_norm(u, 0.0, &s) != NSF_STATUS_OK) return 3;
    nsf_field_free(u);
    if (nsf_field_load(NULL, &u) != NSF_STATUS_NULL_POINTER) return 4;
    printf("%s %.6f %.6f\n", nsf_version(), g[0], s);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let st = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.contains(" 0.875000 0.707107"), "{line}");
}
