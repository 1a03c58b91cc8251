use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ucpt_ffi::*;

fn data(values: &[f64], n: usize, p: usize) -> *mut UcptData {
    let mut out = ptr::null_mut();
    let status = unsafe { ucpt_data_new(values.as_ptr(), n, p, &mut out) };
    assert_eq!(status, UcptStatus::Ok);
    out
}

fn last_error() -> String {
    let msg = ucpt_last_error_message();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

fn shifted_series(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (i as f64 * 0.77).sin() + if i >= n / 2 { 4.0 } else { 0.0 })
        .collect()
}

#[test]
fn run_test_matches_library() {
    let v = shifted_series(50);
    let h = data(&v, 50, 1);
    let mut res = ptr::null_mut();
    let status = unsafe { ucpt_run_test(h, UcptKernel::Linear, 0.05, 300, 11, &mut res) };
    assert_eq!(status, UcptStatus::Ok);
    let mut s = UcptSummary::default();
    assert_eq!(unsafe { ucpt_test_result_summary(res, &mut s) }, UcptStatus::Ok);

    let m = ucpt::DataMatrix::from_series(&v).unwrap();
    let direct = ucpt::run_test(&m, &ucpt::KernelKind::Linear, 0.05, 300, 11).unwrap();
    assert_eq!(s.statistic, direct.statistic.t_max);
    assert_eq!(s.quantile, direct.quantile);
    assert_eq!(s.p_value, direct.p_value);
    assert_eq!(s.reject, direct.reject);
    assert!(s.reject);
    assert_eq!((s.n, s.p, s.bootstrap, s.seed, s.boundary), (50, 1, 300, 11, 0));

    let json = unsafe { ucpt_test_result_to_json(res) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["B"], 300);
    assert!(value.get("elapsed_ms").is_none());
    unsafe {
        ucpt_string_free(json);
        ucpt_test_result_free(res);
        ucpt_data_free(h);
    }
}

#[test]
fn statistic_fills_vector() {
    let h = data(&[1.0, 0.0, 2.0, 0.0, 3.0, 0.0], 3, 2);
    let mut t_max = 0.0;
    let mut t = [0.0; 2];
    let status = unsafe { ucpt_statistic(h, UcptKernel::Linear, &mut t_max, t.as_mut_ptr(), 2) };
    assert_eq!(status, UcptStatus::Ok);
    assert!((t[0] + 4.0 / 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(t[1], 0.0);
    assert!((t_max - 4.0 / 3f64.sqrt()).abs() < 1e-12);

    let mut short = [0.0; 1];
    let status = unsafe { ucpt_statistic(h, UcptKernel::Linear, &mut t_max, short.as_mut_ptr(), 1) };
    assert_eq!(status, UcptStatus::DimensionMismatch);
    unsafe { ucpt_data_free(h) };
}

#[test]
fn cusum_through_ffi() {
    let v = shifted_series(60);
    let h = data(&v, 60, 1);
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { ucpt_run_cusum_test(h, 10, 0.05, 200, 3, &mut res) },
        UcptStatus::Ok
    );
    let mut s = UcptSummary::default();
    assert_eq!(unsafe { ucpt_cusum_result_summary(res, &mut s) }, UcptStatus::Ok);
    assert!(s.reject);
    assert_eq!(s.boundary, 10);
    let json = unsafe { ucpt_cusum_result_to_json(res) };
    assert!(!json.is_null());
    unsafe {
        ucpt_string_free(json);
        ucpt_cusum_result_free(res);
    }
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { ucpt_run_cusum_test(h, 31, 0.05, 200, 3, &mut res) },
        UcptStatus::InvalidParameter
    );
    assert!(last_error().contains("boundary"));
    unsafe { ucpt_data_free(h) };
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    let nan = [1.0, f64::NAN];
    assert_eq!(
        unsafe { ucpt_data_new(nan.as_ptr(), 2, 1, &mut out) },
        UcptStatus::NonFinite
    );
    assert!(last_error().contains("non-finite"));
    assert_eq!(
        unsafe { ucpt_data_new(ptr::null(), 2, 1, &mut out) },
        UcptStatus::NullPointer
    );

    let one = data(&[1.0], 1, 1);
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { ucpt_run_test(one, UcptKernel::Sign, 0.05, 10, 1, &mut res) },
        UcptStatus::InsufficientData
    );
    assert_eq!(
        unsafe { ucpt_run_test(ptr::null(), UcptKernel::Sign, 0.05, 10, 1, &mut res) },
        UcptStatus::NullPointer
    );
    assert_eq!(
        unsafe { ucpt_run_test(one, UcptKernel::Sign, 0.05, 10, 1, ptr::null_mut()) },
        UcptStatus::NullPointer
    );
    unsafe { ucpt_data_free(one) };

    // success clears the previous message
    let ok = data(&[1.0, 2.0], 2, 1);
    assert_eq!(
        unsafe { ucpt_run_test(ok, UcptKernel::Sign, 0.05, 10, 1, &mut res) },
        UcptStatus::Ok
    );
    assert!(ucpt_last_error_message().is_null());
    unsafe {
        ucpt_test_result_free(res);
        ucpt_data_free(ok);
        ucpt_data_free(ptr::null_mut());
        ucpt_test_result_free(ptr::null_mut());
        ucpt_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { ucpt_data_nrows(ptr::null()) }, 0);
}

#[test]
fn csv_loading() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "a,b\n1,2\n3,4\n5,6\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ucpt_data_from_csv(c.as_ptr(), true, &mut out) }, UcptStatus::Ok);
    assert_eq!(unsafe { (ucpt_data_nrows(out), ucpt_data_ncols(out)) }, (3, 2));
    unsafe { ucpt_data_free(out) };

    let missing = CString::new(dir.path().join("nope.csv").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { ucpt_data_from_csv(missing.as_ptr(), false, &mut out) },
        UcptStatus::Io
    );
    std::fs::write(&path, "1,x\n").unwrap();
    assert_eq!(unsafe { ucpt_data_from_csv(c.as_ptr(), false, &mut out) }, UcptStatus::Parse);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ucpt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(manifest_dir().join("include/ucpt.h")).unwrap();
    let source = std::fs::read_to_string(manifest_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.trim().strip_prefix("pub unsafe extern \"C\" fn ").or_else(|| l.trim().strip_prefix("pub extern \"C\" fn ")))
        .filter_map(|l| l.split('(').next())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

/// Compiles `tests/c/smoke.c` against the header and the cdylib when a C
/// compiler is available.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libucpt_ffi.so").exists() {
        eprintln!("cdylib not found in {}, skipping", lib_dir.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lucpt_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"reject\":true"));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
