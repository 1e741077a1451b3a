//! C interface to nsforge: opaque field and run handles, status codes and a
//! per-thread last-error message.
//!
//! Every function catches panics and reports them as `NSF_STATUS_PANIC`.
//! Handles returned through `out` pointers must be released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nsforge::fourier::sf2;
use nsforge::geometry::{gamma_squared, SymMatrix2};
use nsforge::harness::{report_json, RunConfig};
use nsforge::nash::state::{base_stress, base_velocity};
use nsforge::nash::{run, RunReport};
use nsforge::norms::{lp_norm, sobolev_norm};
use nsforge::{Error, SpectralField};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

/// A spectral field (scalar, vector or symmetric tensor).
pub struct NsfField(SpectralField);

/// A finished iteration: its report and final state.
pub struct NsfRun {
    report: RunReport,
    json: Vec<u8>,
    u: SpectralField,
    r: SpectralField,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> NsfStatus {
    match e {
        Error::Parameter(_) | Error::InvalidArgument(_) | Error::Arity { .. } | Error::DimensionMismatch(_) => NsfStatus::InvalidArgument,
        Error::Io(_) | Error::Integrity(_) | Error::Json(_) => NsfStatus::Io,
        _ => NsfStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
    Small,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> NsfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsfStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            NsfStatus::NullPointer
        }
        Ok(Err(Fail::Arg(m))) => {
            set_error(m);
            NsfStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Small)) => {
            set_error("buffer too small".into());
            NsfStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NsfStatus::Panic
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

/// Copy `bytes` plus a terminating NUL into `buf`; `needed` receives the
/// full size including the NUL.
unsafe fn copy_out(bytes: &[u8], buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    if !needed.is_null() {
        needed.write(bytes.len() + 1);
    }
    if buf.is_null() {
        return if len == 0 { Ok(()) } else { Err(Fail::Null("buf")) };
    }
    if len < bytes.len() + 1 {
        return Err(Fail::Small);
    }
    ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
    buf.add(bytes.len()).write(0);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread. Returns the size needed
/// including the NUL; copies when `buf` holds that many bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nsf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let b = e.as_bytes();
        if !buf.is_null() && len > b.len() {
            ptr::copy_nonoverlapping(b.as_ptr() as *const c_char, buf, b.len());
            buf.add(b.len()).write(0);
        }
        b.len() + 1
    })
}

/// Read a `.sf2` file.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsf_field_load(path: *const c_char, out: *mut *mut NsfField) -> NsfStatus {
    guard(|| {
        let p = cstr(path, "path")?;
        let f = sf2::load(Path::new(p))?;
        put(out, Box::into_raw(Box::new(NsfField(f))), "out")
    })
}

/// Write a field as `.sf2`.
///
/// # Safety
/// `field` must come from this library, `path` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nsf_field_save(field: *const NsfField, path: *const c_char) -> NsfStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let p = cstr(path, "path")?;
        sf2::save(&f.0, Path::new(p))?;
        Ok(())
    })
}

/// `u_0 = amp sin(2 pi x2) e1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsf_base_velocity(amp: f64, out: *mut *mut NsfField) -> NsfStatus {
    guard(|| {
        if !amp.is_finite() {
            return Err(Fail::Arg("amp must be finite".into()));
        }
        put(out, Box::into_raw(Box::new(NsfField(base_velocity(amp)))), "out")
    })
}

/// The base Reynolds stress for amplitude `amp`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsf_base_stress(amp: f64, out: *mut *mut NsfField) -> NsfStatus {
    guard(|| {
        if !amp.is_finite() {
            return Err(Fail::Arg("amp must be finite".into()));
        }
        put(out, Box::into_raw(Box::new(NsfField(base_stress(amp)))), "out")
    })
}

/// Grid size, component count (1, 2 or 3) and sup-norm bandwidth.
///
/// # Safety
/// `field` must come from this library; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn nsf_field_info(field: *const NsfField, grid: *mut usize, components: *mut usize, band: *mut usize) -> NsfStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if !grid.is_null() {
            grid.write(f.n());
        }
        if !components.is_null() {
            components.write(f.arity().components());
        }
        if !band.is_null() {
            band.write(f.band());
        }
        Ok(())
    })
}

/// Homogeneous Sobolev norm of order `s`.
///
/// # Safety
/// `field` must come from this library, `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn nsf_field_sobolev_norm(field: *const NsfField, s: f64, out: *mut f64) -> NsfStatus {
    guard(|| {
        let f = deref(field, "field")?;
        put(out, sobolev_norm(&f.0, s).value, "out")
    })
}

/// `L^p` norm, `p >= 1` or `INFINITY`.
///
/// # Safety
/// `field` must come from this library, `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn nsf_field_lp_norm(field: *const NsfField, p: f64, out: *mut f64) -> NsfStatus {
    guard(|| {
        let f = deref(field, "field")?;
        put(out, lp_norm(&f.0, p)?.value, "out")
    })
}

/// # Safety
/// `field` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nsf_field_free(field: *mut NsfField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// `gamma_k(R)^2` for the symmetric matrix `(r11, r12; r12, r22)`.
///
/// # Safety
/// `out` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn nsf_gamma_squared(r11: f64, r12: f64, r22: f64, out: *mut f64) -> NsfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let g = gamma_squared(&SymMatrix2::new(r11, r12, r22))?;
        ptr::copy_nonoverlapping(g.c.as_ptr(), out, 3);
        Ok(())
    })
}

/// Run the iteration for a TOML configuration (empty string: defaults).
/// Writes no files.
///
/// # Safety
/// `config_toml` must be NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nsf_run(config_toml: *const c_char, out: *mut *mut NsfRun) -> NsfStatus {
    guard(|| {
        let cfg = RunConfig::from_toml(cstr(config_toml, "config_toml")?)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let (mut states, report) = run(&cfg.iteration)?;
        let json = report_json(&report)?;
        let last = states.pop().expect("base state");
        let h = NsfRun { report, json, u: last.u, r: last.r };
        put(out, Box::into_raw(Box::new(h)), "out")
    })
}

/// Overall pass flag and number of completed steps.
///
/// # Safety
/// `run` must come from this library; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn nsf_run_summary(run: *const NsfRun, pass: *mut c_int, steps: *mut u32) -> NsfStatus {
    guard(|| {
        let r = deref(run, "run")?;
        if !pass.is_null() {
            pass.write(r.report.pass as c_int);
        }
        if !steps.is_null() {
            steps.write(r.report.steps.len() as u32);
        }
        Ok(())
    })
}

/// Frequency and `||R_{q}||_{H^-2}` after step `index` (0-based).
///
/// # Safety
/// `run` must come from this library; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn nsf_run_step(run: *const NsfRun, index: u32, lambda: *mut u64, r_norm: *mut f64) -> NsfStatus {
    guard(|| {
        let r = deref(run, "run")?;
        let s = r.report.steps.get(index as usize).ok_or_else(|| Fail::Arg(format!("step {index} out of range")))?;
        if !lambda.is_null() {
            lambda.write(s.lambda);
        }
        if !r_norm.is_null() {
            r_norm.write(s.item3.measured);
        }
        Ok(())
    })
}

/// The report as JSON. Call with `buf = NULL, len = 0` to get the size.
///
/// # Safety
/// `run` must come from this library; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nsf_run_report_json(run: *const NsfRun, buf: *mut c_char, len: usize, needed: *mut usize) -> NsfStatus {
    guard(|| {
        let r = deref(run, "run")?;
        copy_out(&r.json, buf, len, needed)
    })
}

/// Final velocity (`which = 0`) or Reynolds stress (`which = 1`) as a new field.
///
/// # Safety
/// `run` must come from this library, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn nsf_run_field(run: *const NsfRun, which: c_int, out: *mut *mut NsfField) -> NsfStatus {
    guard(|| {
        let r = deref(run, "run")?;
        let f = match which {
            0 => r.u.clone(),
            1 => r.r.clone(),
            _ => return Err(Fail::Arg(format!("which = {which}: expected 0 or 1"))),
        };
        put(out, Box::into_raw(Box::new(NsfField(f))), "out")
    })
}

/// # Safety
/// `run` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nsf_run_free(run: *mut NsfRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
