//! C ABI for the `ucpt` change point test.
//!
//! Data and results live behind opaque handles created and released by this
//! library. Every fallible call returns a [`UcptStatus`]; on failure the
//! message is available from [`ucpt_last_error_message`] on the same thread.
//! Panics are caught at the boundary and reported as `UCPT_STATUS_INTERNAL`.
//!
//! The header `include/ucpt.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ucpt::io::{load_csv, CsvSchema};
use ucpt::{CusumResult, DataMatrix, Error, KernelKind, TestResult};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UcptStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    InsufficientData = 3,
    InvalidParameter = 4,
    NonFinite = 5,
    Parse = 6,
    Io = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UcptKernel {
    Linear = 0,
    Sign = 1,
}

impl From<UcptKernel> for KernelKind {
    fn from(k: UcptKernel) -> Self {
        match k {
            UcptKernel::Linear => KernelKind::Linear,
            UcptKernel::Sign => KernelKind::Sign,
        }
    }
}

/// Opaque `n x p` observation matrix.
pub struct UcptData(DataMatrix);

/// Opaque result of [`ucpt_run_test`].
pub struct UcptTestResult(TestResult);

/// Opaque result of [`ucpt_run_cusum_test`].
pub struct UcptCusumResult(CusumResult);

/// Plain-value view of a test result.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UcptSummary {
    pub statistic: f64,
    pub quantile: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub bootstrap: usize,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    /// CUSUM boundary; 0 for the U-statistic test.
    pub boundary: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> UcptStatus {
    match err {
        Error::DimensionMismatch { .. } => UcptStatus::DimensionMismatch,
        Error::InsufficientData { .. } => UcptStatus::InsufficientData,
        Error::InvalidParameter(_) | Error::InvalidScenario(_) | Error::Config(_) => {
            UcptStatus::InvalidParameter
        }
        Error::NonFinite { .. } => UcptStatus::NonFinite,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => UcptStatus::Parse,
        Error::Io(_) | Error::File { .. } => UcptStatus::Io,
        Error::Factorization(_) => UcptStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> UcptStatus
where
    F: FnOnce() -> Result<(), (UcptStatus, String)>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UcptStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            UcptStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (UcptStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (UcptStatus, String) {
    (UcptStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn data_ref<'a>(data: *const UcptData) -> Result<&'a DataMatrix, (UcptStatus, String)> {
    // SAFETY: caller passes NULL or a handle from `ucpt_data_new*`.
    unsafe { data.as_ref() }.map(|d| &d.0).ok_or_else(|| null_err("data"))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the most recent failed call on this thread, or NULL. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn ucpt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ucpt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `n * p` row-major values into a new data handle.
///
/// # Safety
/// `values` must point to `n * p` readable doubles and `out` must be a valid
/// pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn ucpt_data_new(
    values: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut UcptData,
) -> UcptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        if values.is_null() {
            return Err(null_err("values"));
        }
        let len = n
            .checked_mul(p)
            .ok_or_else(|| (UcptStatus::InvalidParameter, "n * p overflows".to_string()))?;
        // SAFETY: caller guarantees `len` readable doubles.
        let slice = unsafe { std::slice::from_raw_parts(values, len) };
        let m = DataMatrix::from_vec(slice.to_vec(), n, p).map_err(lib_err)?;
        // SAFETY: `out` checked non-null above.
        unsafe { *out = boxed(UcptData(m)) };
        Ok(())
    })
}

/// Loads a comma-separated file with one observation per row.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ucpt_data_from_csv(
    path: *const c_char,
    has_header: bool,
    out: *mut *mut UcptData,
) -> UcptStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        if path.is_null() {
            return Err(null_err("path"));
        }
        // SAFETY: caller guarantees a NUL-terminated string.
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|e| (UcptStatus::InvalidParameter, format!("path is not UTF-8: {e}")))?;
        let schema = CsvSchema {
            has_header,
            ..Default::default()
        };
        let m = load_csv(Path::new(path), &schema).map_err(lib_err)?;
        // SAFETY: `out` checked non-null above.
        unsafe { *out = boxed(UcptData(m)) };
        Ok(())
    })
}

/// Number of observations, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ucpt_data_nrows(data: *const UcptData) -> usize {
    // SAFETY: see contract.
    unsafe { data.as_ref() }.map_or(0, |d| d.0.nrows())
}

/// Dimension of each observation, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ucpt_data_ncols(data: *const UcptData) -> usize {
    // SAFETY: see contract.
    unsafe { data.as_ref() }.map_or(0, |d| d.0.ncols())
}

/// # Safety
/// `data` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucpt_data_free(data: *mut UcptData) {
    if !data.is_null() {
        // SAFETY: handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(data) });
    }
}

/// Computes `T_n`. Writes the sup-norm to `t_max`; when `t_vector` is non-NULL
/// and `t_vector_len >= p`, also writes the `p` components.
///
/// # Safety
/// `data` must be a live handle, `t_max` writable, and `t_vector` NULL or
/// valid for `t_vector_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ucpt_statistic(
    data: *const UcptData,
    kernel: UcptKernel,
    t_max: *mut f64,
    t_vector: *mut f64,
    t_vector_len: usize,
) -> UcptStatus {
    guard(|| {
        // SAFETY: see contract.
        let data = unsafe { data_ref(data) }?;
        if t_max.is_null() {
            return Err(null_err("t_max"));
        }
        let s = ucpt::teststat::statistic(&KernelKind::from(kernel), data).map_err(lib_err)?;
        if !t_vector.is_null() {
            if t_vector_len < s.t_vector.len() {
                return Err((
                    UcptStatus::DimensionMismatch,
                    format!("t_vector holds {t_vector_len} values, need {}", s.t_vector.len()),
                ));
            }
            // SAFETY: buffer length checked above.
            unsafe { ptr::copy_nonoverlapping(s.t_vector.as_ptr(), t_vector, s.t_vector.len()) };
        }
        // SAFETY: checked non-null.
        unsafe { *t_max = s.t_max };
        Ok(())
    })
}

/// Runs the bootstrap change point test.
///
/// # Safety
/// `data` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ucpt_run_test(
    data: *const UcptData,
    kernel: UcptKernel,
    alpha: f64,
    bootstrap: usize,
    seed: u64,
    out: *mut *mut UcptTestResult,
) -> UcptStatus {
    guard(|| {
        // SAFETY: see contract.
        let data = unsafe { data_ref(data) }?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let r = ucpt::run_test(data, &KernelKind::from(kernel), alpha, bootstrap, seed)
            .map_err(lib_err)?;
        // SAFETY: checked non-null.
        unsafe { *out = boxed(UcptTestResult(r)) };
        Ok(())
    })
}


/// Copies the result's fields into `out`.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ucpt_test_result_summary(
    result: *const UcptTestResult,
    out: *mut UcptSummary,
) -> UcptStatus {
    guard(|| {
        // SAFETY: see contract.
        let r = &unsafe { result.as_ref() }.ok_or_else(|| null_err("result"))?.0;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let summary = UcptSummary {
            statistic: r.statistic.t_max,
            quantile: r.quantile,
            p_value: r.p_value,
            alpha: r.alpha,
            reject: r.reject,
            bootstrap: r.b,
            seed: r.seed,
            n: r.n,
            p: r.p,
            boundary: 0,
        };
        // SAFETY: checked non-null.
        unsafe { *out = summary };
        Ok(())
    })
}

/// JSON rendering of the result (timing omitted). Free with
/// [`ucpt_string_free`]. Returns NULL on failure.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ucpt_test_result_to_json(result: *const UcptTestResult) -> *mut c_char {
    // SAFETY: see contract.
    let Some(r) = (unsafe { result.as_ref() }) else {
        return ptr::null_mut();
    };
    let mut r = r.0.clone();
    r.elapsed_ms = None;
    to_c_json(&r)
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucpt_test_result_free(result: *mut UcptTestResult) {
    if !result.is_null() {
        // SAFETY: handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Runs the boundary-removed CUSUM test.
///
/// # Safety
/// `data` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ucpt_run_cusum_test(
    data: *const UcptData,
    boundary: usize,
    alpha: f64,
    bootstrap: usize,
    seed: u64,
    out: *mut *mut UcptCusumResult,
) -> UcptStatus {
    guard(|| {
        // SAFETY: see contract.
        let data = unsafe { data_ref(data) }?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let r = ucpt::run_cusum_test(data, boundary, alpha, bootstrap, seed).map_err(lib_err)?;
        // SAFETY: checked non-null.
        unsafe { *out = boxed(UcptCusumResult(r)) };
        Ok(())
    })
}


/// Copies the CUSUM result's fields into `out`.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ucpt_cusum_result_summary(
    result: *const UcptCusumResult,
    out: *mut UcptSummary,
) -> UcptStatus {
    guard(|| {
        // SAFETY: see contract.
        let r = &unsafe { result.as_ref() }.ok_or_else(|| null_err("result"))?.0;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let summary = UcptSummary {
            statistic: r.statistic,
            quantile: r.quantile,
            p_value: r.p_value,
            alpha: r.alpha,
            reject: r.reject,
            bootstrap: r.b,
            seed: r.seed,
            n: r.n,
            p: r.p,
            boundary: r.boundary,
        };
        // SAFETY: checked non-null.
        unsafe { *out = summary };
        Ok(())
    })
}

/// JSON rendering of the CUSUM result (timing omitted). Free with
/// [`ucpt_string_free`].
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ucpt_cusum_result_to_json(result: *const UcptCusumResult) -> *mut c_char {
    // SAFETY: see contract.
    let Some(r) = (unsafe { result.as_ref() }) else {
        return ptr::null_mut();
    };
    let mut r = r.0.clone();
    r.elapsed_ms = None;
    to_c_json(&r)
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucpt_cusum_result_free(result: *mut UcptCusumResult) {
    if !result.is_null() {
        // SAFETY: handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(result) });
    }
}

fn to_c_json<T: serde::Serialize>(value: &T) -> *mut c_char {
    serde_json::to_string(value)
        .ok()
        .and_then(|s| CString::new(s).ok())
        .map_or(ptr::null_mut(), CString::into_raw)
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from a `*_to_json` call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucpt_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}
