//! C ABI for the treecut solver.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free` function. Every fallible call returns a
//! [`TreecutStatus`]; on failure [`treecut_last_error`] describes the cause.
//! Strings returned by accessors stay valid until the owning handle is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use treecut::budget::Budgets;
use treecut::decomposition::{exact_decomposition, validate, TreeDecomposition};
use treecut::error::ErrorClass;
use treecut::format::{parse_decomposition, parse_instance};
use treecut::oracle::exact_sparsest_cut;
use treecut::pipeline::solve;
use treecut::rational::{format_rational, to_f64, Rational};
use treecut::sa::SearchOptions;
use treecut::{Error, SparsestCutInstance};

/// Status codes; the non-zero input/budget/internal values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreecutStatus {
    Ok = 0,
    NullArgument = 1,
    InputError = 2,
    BudgetExceeded = 3,
    InternalError = 4,
    Panic = 5,
}

/// A parsed instance with an optional tree decomposition.
pub struct TreecutInstance {
    instance: SparsestCutInstance,
    decomposition: Option<TreeDecomposition>,
    budgets: Budgets,
}

/// A cut with its sparsity, plus a JSON report.
pub struct TreecutResult {
    cut: Vec<u32>,
    sparsity: Option<Rational>,
    lp_ratio: Option<Rational>,
    sparsity_text: CString,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> TreecutStatus {
    let status = match e.class() {
        ErrorClass::Input => TreecutStatus::InputError,
        ErrorClass::Budget => TreecutStatus::BudgetExceeded,
        ErrorClass::Internal => TreecutStatus::InternalError,
    };
    set_error(e.to_string());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TreecutStatus>) -> TreecutStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TreecutStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside treecut".into());
            TreecutStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, TreecutStatus> {
    if p.is_null() {
        set_error("null argument".into());
        return Err(TreecutStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(Error::Invalid("text is not valid UTF-8".into())))
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, TreecutStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null argument".into());
        TreecutStatus::NullArgument
    })
}

fn result(cut: Vec<u32>, sparsity: Option<Rational>, lp_ratio: Option<Rational>, json: String) -> Box<TreecutResult> {
    let sparsity_text = CString::new(sparsity.as_ref().map_or("inf".into(), format_rational)).unwrap();
    Box::new(TreecutResult {
        cut,
        sparsity,
        lp_ratio,
        sparsity_text,
        json: CString::new(json).unwrap(),
    })
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn treecut_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn treecut_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an instance in `p ssc` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn treecut_instance_parse(text: *const c_char, out: *mut *mut TreecutInstance) -> TreecutStatus {
    guard(|| {
        if out.is_null() {
            set_error("null argument".into());
            return Err(TreecutStatus::NullArgument);
        }
        *out = ptr::null_mut();
        let instance = parse_instance(c_str(text)?).map_err(fail)?;
        let budgets = Budgets::from_env().map_err(fail)?;
        *out = Box::into_raw(Box::new(TreecutInstance { instance, decomposition: None, budgets }));
        Ok(())
    })
}

/// Attaches a tree decomposition in `s td` text format; it must cover the instance.
///
/// # Safety
/// `instance` must come from [`treecut_instance_parse`]; `text` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn treecut_instance_set_decomposition(instance: *mut TreecutInstance, text: *const c_char) -> TreecutStatus {
    guard(|| {
        let inst = instance.as_mut().ok_or_else(|| {
            set_error("null argument".into());
            TreecutStatus::NullArgument
        })?;
        let td = parse_decomposition(c_str(text)?).map_err(fail)?;
        validate(&inst.instance, &td).into_result().map_err(fail)?;
        inst.decomposition = Some(td);
        Ok(())
    })
}

/// Number of vertices, or 0 for NULL.
///
/// # Safety
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn treecut_instance_num_vertices(instance: *const TreecutInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.instance.num_vertices())
}

/// # Safety
/// `instance` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn treecut_instance_free(instance: *mut TreecutInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Full pipeline: LP, ratio search, derandomized rounding. Uses the
/// attached decomposition or computes one exactly.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn treecut_solve(instance: *const TreecutInstance, out: *mut *mut TreecutResult) -> TreecutStatus {
    guard(|| {
        let inst = deref(instance)?;
        if out.is_null() {
            set_error("null argument".into());
            return Err(TreecutStatus::NullArgument);
        }
        *out = ptr::null_mut();
        let td = match &inst.decomposition {
            Some(td) => td.clone(),
            None => exact_decomposition(&inst.instance, inst.budgets.decomposition_vertices).map_err(fail)?,
        };
        let solved = solve(&inst.instance, Some(&td), &SearchOptions::default(), &inst.budgets).map_err(fail)?;
        let rep = &solved.report;
        let json = serde_json::to_string(rep).expect("serializable");
        *out = Box::into_raw(result(
            rep.cut.iter().map(|v| v.0).collect(),
            rep.sparsity.clone(),
            Some(rep.lp_ratio.clone()),
            json,
        ));
        Ok(())
    })
}

/// Exact sparsest cut by enumeration (small instances only).
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn treecut_oracle(instance: *const TreecutInstance, out: *mut *mut TreecutResult) -> TreecutStatus {
    guard(|| {
        let inst = deref(instance)?;
        if out.is_null() {
            set_error("null argument".into());
            return Err(TreecutStatus::NullArgument);
        }
        *out = ptr::null_mut();
        let (cut, sp) = exact_sparsest_cut(&inst.instance, &inst.budgets).map_err(fail)?;
        let side: Vec<u32> = cut.side().iter().map(|v| v.0).collect();
        let json = serde_json::json!({
            "cut": side,
            "capacity": format_rational(&sp.cut_capacity),
            "demand": format_rational(&sp.cut_demand),
            "sparsity": sp.ratio.as_ref().map(format_rational),
        })
        .to_string();
        *out = Box::into_raw(result(side, sp.ratio, None, json));
        Ok(())
    })
}

/// Number of vertices on the reported side of the cut.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_cut_size(result: *const TreecutResult) -> usize {
    result.as_ref().map_or(0, |r| r.cut.len())
}

/// Copies up to `capacity` vertex ids of the cut side into `buffer`;
/// returns how many were written.
///
/// # Safety
/// `buffer` must have room for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_cut(result: *const TreecutResult, buffer: *mut u32, capacity: usize) -> usize {
    let Some(r) = result.as_ref() else { return 0 };
    if buffer.is_null() {
        return 0;
    }
    let n = r.cut.len().min(capacity);
    ptr::copy_nonoverlapping(r.cut.as_ptr(), buffer, n);
    n
}

/// Exact sparsity as `p/q` text (`inf` when no demand is separated).
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_sparsity_text(result: *const TreecutResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.sparsity_text.as_ptr())
}

/// Sparsity as a double (infinity when no demand is separated).
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_sparsity(result: *const TreecutResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.sparsity.as_ref().map_or(f64::INFINITY, to_f64))
}

/// LP ratio as a double; NaN for oracle results.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_lp_ratio(result: *const TreecutResult) -> f64 {
    result.as_ref().and_then(|r| r.lp_ratio.as_ref()).map_or(f64::NAN, to_f64)
}

/// Full report as JSON.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_json(result: *const TreecutResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `result` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn treecut_result_free(result: *mut TreecutResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
