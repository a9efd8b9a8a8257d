//! C interface to accrlab.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with their `_free` functions. Every call returns an [`AccrlabStatus`]; on
//! failure the message is available from [`accrlab_last_error_message`] on
//! the same thread until the next failing call. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use accrlab::report::Report;
use accrlab::runner::{self, RunOptions};
use accrlab::scenario::{self, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccrlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed scenario or unknown builtin.
    Parse = 3,
    /// The scenario could not be evaluated (domain, degenerate metric, ...).
    Evaluation = 4,
    Panic = 5,
}

/// Opaque scenario handle.
pub struct AccrlabScenario(Scenario);

/// Opaque report handle.
pub struct AccrlabReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guarded(f: impl FnOnce() -> Result<(), (AccrlabStatus, String)>) -> AccrlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AccrlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AccrlabStatus::Panic
        }
    }
}

fn null(what: &str) -> (AccrlabStatus, String) {
    (AccrlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AccrlabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (AccrlabStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn parse_err(e: accrlab::Error) -> (AccrlabStatus, String) {
    (AccrlabStatus::Parse, e.to_string())
}

fn eval_err(e: accrlab::Error) -> (AccrlabStatus, String) {
    (AccrlabStatus::Evaluation, e.to_string())
}

/// Parses a scenario from UTF-8 JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn accrlab_scenario_from_json(
    json: *const c_char,
    out: *mut *mut AccrlabScenario,
) -> AccrlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let s = Scenario::from_json(text).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(AccrlabScenario(s)));
        Ok(())
    })
}

/// Builds a builtin scenario by name. `n` = 0 selects the default size.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn accrlab_scenario_builtin(
    name: *const c_char,
    n: u32,
    seed: u64,
    out: *mut *mut AccrlabScenario,
) -> AccrlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = read_str(name, "name")?;
        let n = (n > 0).then_some(n as usize);
        let s = scenario::builtin(name, n, seed).map_err(parse_err)?;
        *out = Box::into_raw(Box::new(AccrlabScenario(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn accrlab_scenario_free(s: *mut AccrlabScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Runs every check of a scenario. `seed` and `points` override the
/// scenario's sampler when `has_seed` / `points` are nonzero.
///
/// # Safety
/// `s` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn accrlab_run(
    s: *const AccrlabScenario,
    has_seed: bool,
    seed: u64,
    points: u32,
    inverse: bool,
    out: *mut *mut AccrlabReport,
) -> AccrlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        let opts = RunOptions {
            seed: has_seed.then_some(seed),
            points: (points > 0).then_some(points as usize),
            inverse,
            ..RunOptions::default()
        };
        let r = runner::run_scenario(s.0.clone(), &opts).map_err(eval_err)?;
        *out = Box::into_raw(Box::new(AccrlabReport(r)));
        Ok(())
    })
}

/// # Safety
/// `r` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn accrlab_report_free(r: *mut AccrlabReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// The report as JSON; release it with [`accrlab_string_free`].
///
/// # Safety
/// `r` must be a live report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn accrlab_report_json(
    r: *const AccrlabReport,
    out: *mut *mut c_char,
) -> AccrlabStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        let json =
            CString::new(r.0.to_json()).map_err(|e| (AccrlabStatus::Evaluation, e.to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`accrlab_report_json`]; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn accrlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Whether no check failed.
///
/// # Safety
/// `r` must be a live report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn accrlab_report_passed(
    r: *const AccrlabReport,
    out: *mut bool,
) -> AccrlabStatus {
    guarded(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.0.passed();
        Ok(())
    })
}

/// # Safety
/// `r` must be a live report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn accrlab_report_check_count(
    r: *const AccrlabReport,
    out: *mut usize,
) -> AccrlabStatus {
    guarded(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.0.checks.len();
        Ok(())
    })
}

/// τ, τ* and τ̃ of the scenario's transformed structure at `point`, written
/// to `out[0..3]`. `len` must equal 2n+1.
///
/// # Safety
/// `point` must hold `len` doubles and `out` room for three.
#[no_mangle]
pub unsafe extern "C" fn accrlab_scalar_curvatures(
    s: *const AccrlabScenario,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> AccrlabStatus {
    guarded(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if point.is_null() {
            return Err(null("point"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = std::slice::from_raw_parts(point, len);
        let v = runner::scalar_curvatures(&s.0, p).map_err(eval_err)?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&v);
        Ok(())
    })
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn accrlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_arguments_are_reported() {
        let mut out = ptr::null_mut();
        let st = unsafe { accrlab_scenario_from_json(ptr::null(), &mut out) };
        assert_eq!(st, AccrlabStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(accrlab_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("json"));
    }

    #[test]
    fn invalid_utf8_is_reported() {
        let bytes = [0xffu8, 0xfe, 0];
        let mut out = ptr::null_mut();
        let st = unsafe { accrlab_scenario_from_json(bytes.as_ptr().cast(), &mut out) };
        assert_eq!(st, AccrlabStatus::InvalidUtf8);
        assert!(out.is_null());
    }
}
