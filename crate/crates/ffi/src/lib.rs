//! C ABI for ratiokit.
//!
//! Parameter sets live behind opaque handles created by `rk_*_new` and
//! released with the matching `rk_*_free`. Every fallible call returns an
//! [`RkStatus`]; on failure a message is kept per thread and can be read
//! with [`rk_last_error`]. Complex arrays are interleaved `re, im` pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use ratiokit::formula::{eval_compact, eval_cor12, eval_stable, eval_thm1, EvalResult, Method};
use ratiokit::haar_mc::{mc_estimate, mc_estimate_extended, Estimate};
use ratiokit::params::{ExtendedParams, SpectralParams};
use ratiokit::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkStatus {
    Ok = 0,
    NullPointer = 1,
    DomainViolation = 2,
    Shape = 3,
    Value = 4,
    Capacity = 5,
    SingularInput = 6,
    ExtrapolationUnstable = 7,
    NumericalFailure = 8,
    SingularSample = 9,
    TruncationTooCoarse = 10,
    Other = 11,
    Panic = 99,
}

impl From<&Error> for RkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DomainViolation { .. } => RkStatus::DomainViolation,
            Error::Shape(_) => RkStatus::Shape,
            Error::Value(_) => RkStatus::Value,
            Error::Capacity { .. } => RkStatus::Capacity,
            Error::SingularInput(_) => RkStatus::SingularInput,
            Error::ExtrapolationUnstable { .. } => RkStatus::ExtrapolationUnstable,
            Error::NumericalFailure(_) => RkStatus::NumericalFailure,
            Error::SingularSample(_) => RkStatus::SingularSample,
            Error::TruncationTooCoarse { .. } => RkStatus::TruncationTooCoarse,
            _ => RkStatus::Other,
        }
    }
}

/// Evaluation output.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RkValue {
    pub re: f64,
    pub im: f64,
    /// `max|term| / |sum|`, at least 1.
    pub condition: f64,
    /// 1 when coincident parameters were handled by extrapolation.
    pub confluent: u8,
    /// 1 when the sum was redone in double-double.
    pub extended_precision: u8,
}

impl From<EvalResult> for RkValue {
    fn from(r: EvalResult) -> Self {
        Self {
            re: r.value.re,
            im: r.value.im,
            condition: r.condition,
            confluent: (r.method == Method::ConfluentExtrapolated) as u8,
            extended_precision: r.extended_precision as u8,
        }
    }
}

/// Monte Carlo output.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RkEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl From<Estimate> for RkEstimate {
    fn from(e: Estimate) -> Self {
        Self {
            mean_re: e.mean.re,
            mean_im: e.mean.im,
            stderr: e.stderr,
            samples: e.samples,
            seed: e.seed,
        }
    }
}

/// Opaque equal-count parameter set.
pub struct RkParams(SpectralParams);

/// Opaque unequal-count parameter set.
pub struct RkExtendedParams(ExtendedParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RkStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RkStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            RkStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RkStatus::Panic
        }
    }
}

/// Reads `len` interleaved complex values; `data` may be null when `len` is 0.
unsafe fn complex_slice(data: *const f64, len: usize, what: &'static str) -> Result<Vec<Complex64>, Fail> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(Fail::Null(what));
    }
    // SAFETY: the caller promises `2 * len` readable doubles at `data`.
    let raw = unsafe { std::slice::from_raw_parts(data, 2 * len) };
    Ok(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    // SAFETY: non-null and, per the caller, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn borrow<'a, T>(h: *const T, what: &'static str) -> Result<&'a T, Fail> {
    // SAFETY: the caller passes a live handle from the matching constructor.
    unsafe { h.as_ref() }.ok_or(Fail::Null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn rk_status_name(status: RkStatus) -> *const c_char {
    let s: &'static CStr = match status {
        RkStatus::Ok => c"ok",
        RkStatus::NullPointer => c"null pointer",
        RkStatus::DomainViolation => c"domain violation",
        RkStatus::Shape => c"shape error",
        RkStatus::Value => c"invalid value",
        RkStatus::Capacity => c"capacity exceeded",
        RkStatus::SingularInput => c"singular input",
        RkStatus::ExtrapolationUnstable => c"extrapolation unstable",
        RkStatus::NumericalFailure => c"numerical failure",
        RkStatus::SingularSample => c"singular sample",
        RkStatus::TruncationTooCoarse => c"truncation too coarse",
        RkStatus::Other => c"other error",
        RkStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Validates `(p, q, N, xs, ys)`; `xs` and `ys` hold `p + q` complex values each.
///
/// # Safety
/// `xs` and `ys` must point to `2 * (p + q)` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rk_params_new(
    p: usize,
    q: usize,
    n: usize,
    xs: *const f64,
    ys: *const f64,
    out: *mut *mut RkParams,
) -> RkStatus {
    guard(|| {
        let xs = unsafe { complex_slice(xs, p + q, "xs") }?;
        let ys = unsafe { complex_slice(ys, p + q, "ys") }?;
        let prm = SpectralParams::new(p, q, n, xs, ys)?;
        unsafe { write(out, Box::into_raw(Box::new(RkParams(prm))), "out") }
    })
}

/// # Safety
/// `params` must be null or a handle from [`rk_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rk_params_free(params: *mut RkParams) {
    if !params.is_null() {
        // SAFETY: allocated by `rk_params_new` via `Box::into_raw`.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// # Safety
/// `xs` must point to `2 * (p + q)` readable doubles and `ys` to
/// `2 * (pprime + qprime)`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_extended_params_new(
    p: usize,
    q: usize,
    pprime: usize,
    qprime: usize,
    n: usize,
    xs: *const f64,
    ys: *const f64,
    out: *mut *mut RkExtendedParams,
) -> RkStatus {
    guard(|| {
        let xs = unsafe { complex_slice(xs, p + q, "xs") }?;
        let ys = unsafe { complex_slice(ys, pprime + qprime, "ys") }?;
        let prm = ExtendedParams::new((p, q), (pprime, qprime), n, xs, ys)?;
        unsafe { write(out, Box::into_raw(Box::new(RkExtendedParams(prm))), "out") }
    })
}

/// # Safety
/// `params` must be null or a handle from [`rk_extended_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rk_extended_params_free(params: *mut RkExtendedParams) {
    if !params.is_null() {
        // SAFETY: allocated by `rk_extended_params_new` via `Box::into_raw`.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Equal-count closed form.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rk_eval_thm1(params: *const RkParams, out: *mut RkValue) -> RkStatus {
    guard(|| {
        let prm = unsafe { borrow(params, "params") }?;
        let r = eval_thm1(&prm.0)?;
        unsafe { write(out, r.into(), "out") }
    })
}

/// Unequal-count closed form.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rk_eval_cor12(params: *const RkExtendedParams, out: *mut RkValue) -> RkStatus {
    guard(|| {
        let prm = unsafe { borrow(params, "params") }?;
        let r = eval_cor12(&prm.0)?;
        unsafe { write(out, r.into(), "out") }
    })
}

/// Limit with every y removed; `xs` holds `p + q` complex values.
///
/// # Safety
/// `xs` must point to `2 * (p + q)` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_eval_compact(p: usize, q: usize, n: usize, xs: *const f64, out: *mut RkValue) -> RkStatus {
    guard(|| {
        let xs = unsafe { complex_slice(xs, p + q, "xs") }?;
        let r = eval_compact(p, q, n, &xs)?;
        unsafe { write(out, r.into(), "out") }
    })
}

/// Pure reciprocal average for `N ≥ max(p, q)`; `ys` holds `p + q` complex values.
///
/// # Safety
/// `ys` must point to `2 * (p + q)` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rk_eval_stable(p: usize, q: usize, n: usize, ys: *const f64, out: *mut RkValue) -> RkStatus {
    guard(|| {
        let ys = unsafe { complex_slice(ys, p + q, "ys") }?;
        let r = eval_stable(p, q, n, &ys)?;
        unsafe { write(out, r.into(), "out") }
    })
}

/// Monte Carlo estimate; bitwise reproducible for a fixed seed.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rk_mc_estimate(
    params: *const RkParams,
    samples: u64,
    seed: u64,
    out: *mut RkEstimate,
) -> RkStatus {
    guard(|| {
        let prm = unsafe { borrow(params, "params") }?;
        let e = mc_estimate(&prm.0, samples, seed)?;
        unsafe { write(out, e.into(), "out") }
    })
}

/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rk_mc_estimate_extended(
    params: *const RkExtendedParams,
    samples: u64,
    seed: u64,
    out: *mut RkEstimate,
) -> RkStatus {
    guard(|| {
        let prm = unsafe { borrow(params, "params") }?;
        let e = mc_estimate_extended(&prm.0, samples, seed)?;
        unsafe { write(out, e.into(), "out") }
    })
}
