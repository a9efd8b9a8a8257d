use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use accrlab_ffi::*;

#[test]
fn builtin_run_and_report() {
    let name = CString::new("example-5.1").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { accrlab_scenario_builtin(name.as_ptr(), 1, 3, &mut s) },
        AccrlabStatus::Ok
    );
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { accrlab_run(s, true, 3, 4, false, &mut r) },
        AccrlabStatus::Ok
    );
    let mut count = 0usize;
    assert_eq!(
        unsafe { accrlab_report_check_count(r, &mut count) },
        AccrlabStatus::Ok
    );
    assert!(count > 10);
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { accrlab_report_json(r, &mut json) },
        AccrlabStatus::Ok
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"scenario\": \"example-5.1-n1\""));
    unsafe {
        accrlab_string_free(json);
        accrlab_report_free(r);
        accrlab_scenario_free(s);
    }
}

#[test]
fn scalar_curvatures_of_the_solved_example() {
    let name = CString::new("example-4.1-solved-soliton").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { accrlab_scenario_builtin(name.as_ptr(), 0, 0, &mut s) },
        AccrlabStatus::Ok
    );
    let t = 1.5;
    let p = [0.3, 1.2, -0.4, 0.8, t];
    let mut out = [0.0f64; 3];
    assert_eq!(
        unsafe { accrlab_scalar_curvatures(s, p.as_ptr(), p.len(), out.as_mut_ptr()) },
        AccrlabStatus::Ok
    );
    // τ = −1/t², τ* = 0, τ̃ = −1/t² on this example
    assert!((out[0] + 1.0 / (t * t)).abs() < 1e-10, "{out:?}");
    assert!(out[1].abs() < 1e-10);
    assert!((out[2] + 1.0 / (t * t)).abs() < 1e-10);
    let short = [1.0, 2.0];
    assert_eq!(
        unsafe { accrlab_scalar_curvatures(s, short.as_ptr(), short.len(), out.as_mut_ptr()) },
        AccrlabStatus::Evaluation
    );
    unsafe { accrlab_scenario_free(s) };
}

#[test]
fn parse_errors_carry_a_message() {
    let bad = CString::new(r#"{"name":"x","n":1,"structure":"builtin_f0","checks":[],"extra":0}"#)
        .unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { accrlab_scenario_from_json(bad.as_ptr(), &mut s) },
        AccrlabStatus::Parse
    );
    assert!(s.is_null());
    let msg = unsafe { CStr::from_ptr(accrlab_last_error_message()) }
        .to_str()
        .unwrap();
    assert!(msg.contains("extra"), "{msg}");
    let unknown = CString::new("no-such-builtin").unwrap();
    assert_eq!(
        unsafe { accrlab_scenario_builtin(unknown.as_ptr(), 0, 0, &mut s) },
        AccrlabStatus::Parse
    );
}

#[test]
fn null_handles_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { accrlab_run(ptr::null(), false, 0, 0, false, &mut out) },
        AccrlabStatus::NullPointer
    );
    let mut passed = false;
    assert_eq!(
        unsafe { accrlab_report_passed(ptr::null(), &mut passed) },
        AccrlabStatus::NullPointer
    );
    unsafe {
        accrlab_scenario_free(ptr::null_mut());
        accrlab_report_free(ptr::null_mut());
        accrlab_string_free(ptr::null_mut());
    }
}

/// Directory holding the built cdylib, two levels above the test binary.
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = lib_dir();
    assert!(
        lib.join("libaccrlab_ffi.so").exists(),
        "cdylib not found in {}",
        lib.display()
    );
    let out = std::env::temp_dir().join(format!("accrlab_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg("-L")
        .arg(&lib)
        .arg("-laccrlab_ffi")
        .arg("-o")
        .arg(&out)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let run = Command::new(&out)
        .env("LD_LIBRARY_PATH", &lib)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&out);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "{stdout} {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(stdout.contains("tau=-1.000000000000 passed=1"), "{stdout}");
    assert!(stdout.contains("version=1"));
}
