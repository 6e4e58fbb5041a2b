//! C interface to vertexcalc.
//!
//! All objects are opaque handles created by `vc_*_new`/`vc_*_from_*` style
//! functions and released with the matching `vc_*_free`. Fallible calls
//! return a [`VcStatus`] and write their result through an out pointer; the
//! message of the last failure on the calling thread is available from
//! [`vc_last_error`]. Strings returned to the caller are owned by the caller
//! and must be released with [`vc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use num_rational::BigRational;
use vertexcalc::deltacalc::{bell_polynomial, decompose, DeltaError, DeltaSum, PointSet};
use vertexcalc::fields::{ope_extract, EvalCtx, Evaluator, FieldError, FieldExpr, OpeConfig, OpeTable, Registry};
use vertexcalc::scalar::CycScalar;
use vertexcalc::series::BiDist;
use vertexcalc::verify::{locality_order, run_suite, Report, SuiteConfig};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotLocal = 4,
    WindowTooSmall = 5,
    UnknownSuite = 6,
    OutOfRange = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(VcStatus, String);

impl From<DeltaError> for Failure {
    fn from(e: DeltaError) -> Self {
        let status = match e {
            DeltaError::NotLocal(..) => VcStatus::NotLocal,
            DeltaError::WindowTooSmall { .. } => VcStatus::WindowTooSmall,
            DeltaError::BellRange { .. } | DeltaError::OrdersLength { .. } | DeltaError::InvalidPoint(_) => VcStatus::OutOfRange,
            _ => VcStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        let status = match &e {
            FieldError::NotLocal(..) => VcStatus::NotLocal,
            FieldError::Unsatisfiable(_) => VcStatus::WindowTooSmall,
            FieldError::Delta(d) => return d.clone().into(),
            FieldError::MissingOrders(_) | FieldError::PointIndex(..) => VcStatus::OutOfRange,
            _ => VcStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn parse_failure(msg: impl Into<String>) -> Failure {
    Failure(VcStatus::Parse, msg.into())
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            VcStatus::Ok
        }
        Ok(Err(Failure(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            VcStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(VcStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(VcStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

unsafe fn read_orders(orders: *const u32, len: usize) -> Result<Vec<u32>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if orders.is_null() {
        return Err(Failure(VcStatus::NullPointer, "null orders array".into()));
    }
    Ok(std::slice::from_raw_parts(orders, len).to_vec())
}

fn check_out<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(VcStatus::NullPointer, "null out pointer".into()))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(VcStatus::NullPointer, "null handle".into()))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn vc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Bell polynomial B(n, k) rendered as text, e.g. "3*x1*x2" for (3, 2).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_bell(n: usize, k: usize, out: *mut *mut c_char) -> VcStatus {
    guard(|| {
        check_out(out)?;
        let p = bell_polynomial(n, k)?;
        *out = to_c_string(p.to_string());
        Ok(())
    })
}

/// A two-variable distribution with exact cyclotomic coefficients.
pub struct VcDist {
    order: u32,
    dist: BiDist<CycScalar>,
}

/// Parses a distribution from its JSON form
/// `{"N": n, "zwindow": [lo, hi], "wwindow": [lo, hi], "terms": [[i, j, "c"], ...]}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_dist_from_json(json: *const c_char, out: *mut *mut VcDist) -> VcStatus {
    guard(|| {
        check_out(out)?;
        let s = read_str(json)?;
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| parse_failure(format!("invalid JSON: {e}")))?;
        let (order, dist) = BiDist::<CycScalar>::from_json(&v).map_err(|e| parse_failure(e.to_string()))?;
        *out = Box::into_raw(Box::new(VcDist { order, dist }));
        Ok(())
    })
}

/// Number of nonzero stored coefficients.
///
/// # Safety
/// `d` must be null or a live handle from [`vc_dist_from_json`].
#[no_mangle]
pub unsafe extern "C" fn vc_dist_term_count(d: *const VcDist) -> usize {
    d.as_ref().map_or(0, |d| d.dist.coeffs.len())
}

/// # Safety
/// `d` must be null or a live handle from [`vc_dist_from_json`].
#[no_mangle]
pub unsafe extern "C" fn vc_dist_free(d: *mut VcDist) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Delta-function decomposition of a local distribution.
pub struct VcDeltaSum {
    order: u32,
    sum: DeltaSum<CycScalar>,
}

/// Decomposes `d` at the `roots`-th roots of unity with one locality order per point.
/// `roots == 0` uses the distribution's own N.
///
/// # Safety
/// `d` must be a live handle, `orders` must point to `len` values, `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vc_decompose(d: *const VcDist, roots: u32, orders: *const u32, len: usize, out: *mut *mut VcDeltaSum) -> VcStatus {
    guard(|| {
        check_out(out)?;
        let d = handle(d)?;
        let orders = read_orders(orders, len)?;
        let n = if roots == 0 { d.order } else { roots };
        if d.order % n != 0 {
            return Err(Failure(VcStatus::OutOfRange, format!("{n} roots do not live in Q(e_{})", d.order)));
        }
        let sum = decompose(&d.dist, &PointSet::roots_in(n, d.order), &orders)?;
        *out = Box::into_raw(Box::new(VcDeltaSum { order: d.order, sum }));
        Ok(())
    })
}

/// Number of nonzero (point, derivative) coefficients.
///
/// # Safety
/// `s` must be null or a live handle from [`vc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn vc_delta_sum_term_count(s: *const VcDeltaSum) -> usize {
    s.as_ref().map_or(0, |s| s.sum.terms.len())
}

/// Coefficient of the (k, l) term as text in w, or null if the term is absent.
///
/// # Safety
/// `s` must be null or a live handle from [`vc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn vc_delta_sum_coeff(s: *const VcDeltaSum, k: usize, l: u32) -> *mut c_char {
    let Some(s) = s.as_ref() else { return ptr::null_mut() };
    match s.sum.coeff(k, l) {
        Some(c) => to_c_string(vertexcalc::series::LaurentPoly::from_terms(s.order, c.coeffs.clone()).render('w')),
        None => ptr::null_mut(),
    }
}

/// JSON form of the decomposition, same shape as the CLI's `decompose` output.
///
/// # Safety
/// `s` must be null or a live handle from [`vc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn vc_delta_sum_to_json(s: *const VcDeltaSum) -> *mut c_char {
    s.as_ref().map_or(ptr::null_mut(), |s| to_c_string(s.sum.to_json().to_string()))
}

/// # Safety
/// `s` must be null or a live handle from [`vc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn vc_delta_sum_free(s: *mut VcDeltaSum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Field evaluation state for one choice of N: the standard field registry
/// and a memoizing evaluator.
pub struct VcSession {
    registry: Registry,
    evaluator: Evaluator,
    cfg: OpeConfig,
    max_order: u32,
}

/// Creates a session whose points of locality are the `roots`-th roots of unity.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_session_new(roots: u32, out: *mut *mut VcSession) -> VcStatus {
    guard(|| {
        check_out(out)?;
        if roots == 0 {
            return Err(Failure(VcStatus::OutOfRange, "roots must be positive".into()));
        }
        let ctx = EvalCtx::new(roots, roots)?;
        let s = VcSession { registry: Registry::standard(ctx), evaluator: Evaluator::new(ctx), cfg: OpeConfig::default(), max_order: 6 };
        *out = Box::into_raw(Box::new(s));
        Ok(())
    })
}

/// Sets the energy cutoff num/den used for OPE sampling.
///
/// # Safety
/// `s` must be a live session handle.
#[no_mangle]
pub unsafe extern "C" fn vc_session_set_cutoff(s: *mut VcSession, num: i64, den: i64) -> VcStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| Failure(VcStatus::NullPointer, "null handle".into()))?;
        if den <= 0 || num < 0 {
            return Err(Failure(VcStatus::OutOfRange, "cutoff must be a nonnegative fraction with positive denominator".into()));
        }
        s.cfg.cutoff = BigRational::new(BigInt::from(num), BigInt::from(den));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live session handle.
#[no_mangle]
pub unsafe extern "C" fn vc_session_free(s: *mut VcSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

fn field(s: &VcSession, text: &str) -> Result<FieldExpr, Failure> {
    if let Some(e) = s.registry.get(text.trim()) {
        return Ok(e.clone());
    }
    let v: serde_json::Value = serde_json::from_str(text).map_err(|_| parse_failure(format!("unknown field {text:?}")))?;
    Ok(FieldExpr::from_json(&v, &s.registry)?)
}

/// Table of OPE coefficients.
pub struct VcOpe {
    table: OpeTable,
}

/// OPE of fields `a` and `b`, given by registry name ("phiB", "hD", ...) or
/// JSON expression. With `len == 0` the smallest uniform locality order is searched.
///
/// # Safety
/// `s` must be a live session, `a` and `b` nul-terminated strings, `orders`
/// must point to `len` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vc_ope(s: *mut VcSession, a: *const c_char, b: *const c_char, orders: *const u32, len: usize, out: *mut *mut VcOpe) -> VcStatus {
    guard(|| {
        check_out(out)?;
        let s = s.as_mut().ok_or_else(|| Failure(VcStatus::NullPointer, "null handle".into()))?;
        let fa = field(s, read_str(a)?)?;
        let fb = field(s, read_str(b)?)?;
        let mut orders = read_orders(orders, len)?;
        if orders.is_empty() {
            let m = locality_order(&mut s.evaluator, &fa, &fb, &s.cfg.cutoff, s.max_order)?
                .ok_or_else(|| Failure(VcStatus::NotLocal, format!("not local for uniform orders up to {}", s.max_order)))?;
            orders = vec![m; s.evaluator.ctx().roots as usize];
        }
        let table = ope_extract(&mut s.evaluator, &fa, &fb, &orders, &s.cfg, &s.registry)?;
        *out = Box::into_raw(Box::new(VcOpe { table }));
        Ok(())
    })
}

/// Number of nonzero OPE coefficients.
///
/// # Safety
/// `o` must be null or a live handle from [`vc_ope`].
#[no_mangle]
pub unsafe extern "C" fn vc_ope_entry_count(o: *const VcOpe) -> usize {
    o.as_ref().map_or(0, |o| o.table.entries.len())
}

/// Identified coefficient at point index `j` (1-based) and pole order `k`,
/// or null if it is zero or could not be identified.
///
/// # Safety
/// `o` must be null or a live handle from [`vc_ope`].
#[no_mangle]
pub unsafe extern "C" fn vc_ope_render(o: *const VcOpe, j: usize, k: i64) -> *mut c_char {
    o.as_ref().and_then(|o| o.table.render(j, k)).map_or(ptr::null_mut(), to_c_string)
}

/// JSON form of the table, same shape as the CLI's `ope` output.
///
/// # Safety
/// `o` must be null or a live handle from [`vc_ope`].
#[no_mangle]
pub unsafe extern "C" fn vc_ope_to_json(o: *const VcOpe) -> *mut c_char {
    o.as_ref().map_or(ptr::null_mut(), |o| to_c_string(o.table.to_json().to_string()))
}

/// # Safety
/// `o` must be null or a live handle from [`vc_ope`].
#[no_mangle]
pub unsafe extern "C" fn vc_ope_free(o: *mut VcOpe) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Outcome of a verification suite.
pub struct VcReport {
    report: Report,
}

/// Runs a named verification suite with its default parameters.
/// A report is produced even when some of its checks fail.
///
/// # Safety
/// `suite` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_verify(suite: *const c_char, out: *mut *mut VcReport) -> VcStatus {
    guard(|| {
        check_out(out)?;
        let name = read_str(suite)?;
        let cfg = SuiteConfig { cutoff: None, mode_range: None, roots: None };
        let report = run_suite(name, &cfg).ok_or_else(|| Failure(VcStatus::UnknownSuite, format!("unknown suite {name:?}")))?;
        *out = Box::into_raw(Box::new(VcReport { report }));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live handle from [`vc_verify`].
#[no_mangle]
pub unsafe extern "C" fn vc_report_check_count(r: *const VcReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.checks.len())
}

/// # Safety
/// `r` must be null or a live handle from [`vc_verify`].
#[no_mangle]
pub unsafe extern "C" fn vc_report_failed_count(r: *const VcReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.failures().count())
}

/// # Safety
/// `r` must be null or a live handle from [`vc_verify`].
#[no_mangle]
pub unsafe extern "C" fn vc_report_to_json(r: *const VcReport) -> *mut c_char {
    handle(r).map_or(ptr::null_mut(), |r| to_c_string(r.report.to_json().to_string()))
}

/// # Safety
/// `r` must be null or a live handle from [`vc_verify`].
#[no_mangle]
pub unsafe extern "C" fn vc_report_free(r: *mut VcReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
