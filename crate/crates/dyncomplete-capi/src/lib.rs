//! C ABI for the dyncomplete library.
//!
//! Conventions: tables are opaque handles created from quiver JSON; every
//! report-producing function returns a newly allocated JSON string that the
//! caller must release with [`dyncomplete_string_free`], or NULL on failure
//! with the message available from [`dyncomplete_last_error`].

use dyncomplete::cli::{completion_report_json, ext_status_json};
use dyncomplete::complete;
use dyncomplete::dercat::TableReport;
use dyncomplete::metric::Metric;
use dyncomplete::quiver::Quiver;
use dyncomplete::HomTable;
use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::ptr;

/// Opaque handle over a built Hom table.
pub struct DynTable {
    inner: HomTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn output(json: serde_json::Value) -> *mut c_char {
    let text = serde_json::to_string(&json).unwrap_or_default();
    match CString::new(text) {
        Ok(c) => c.into_raw(),
        Err(_) => {
            set_error("report contained an interior NUL");
            ptr::null_mut()
        }
    }
}

unsafe fn cstr_arg(ptr: *const c_char, name: &str) -> Result<String, ()> {
    if ptr.is_null() {
        set_error(format!("{name} is NULL"));
        return Err(());
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s.to_string()),
        Err(_) => {
            set_error(format!("{name} is not valid UTF-8"));
            Err(())
        }
    }
}

unsafe fn table_arg<'a>(t: *const DynTable) -> Result<&'a HomTable, ()> {
    if t.is_null() {
        set_error("table handle is NULL");
        return Err(());
    }
    Ok(&(*t).inner)
}

unsafe fn metric_arg(t: &HomTable, json: *const c_char) -> Result<Metric, ()> {
    let text = cstr_arg(json, "metric JSON")?;
    let doc: serde_json::Value = match serde_json::from_str(&text) {
        Ok(d) => d,
        Err(e) => {
            set_error(format!("metric JSON: {e}"));
            return Err(());
        }
    };
    Metric::from_json(t, &doc).map_err(|e| set_error(e.to_string()))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn dyncomplete_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message on this thread, or NULL. The caller frees the string.
#[no_mangle]
pub extern "C" fn dyncomplete_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(c) => c.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Builds the Hom table of a Dynkin quiver given as JSON. Returns NULL on
/// failure.
///
/// # Safety
/// `quiver_json` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_table_new(
    quiver_json: *const c_char,
    seed: u64,
) -> *mut DynTable {
    clear_error();
    let Ok(text) = cstr_arg(quiver_json, "quiver JSON") else {
        return ptr::null_mut();
    };
    let quiver = match Quiver::parse(&text) {
        Ok(q) => q,
        Err(e) => {
            set_error(e.to_string());
            return ptr::null_mut();
        }
    };
    match HomTable::build(quiver, seed) {
        Ok(t) => Box::into_raw(Box::new(DynTable { inner: t })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Releases a table handle. NULL is ignored.
///
/// # Safety
/// `t` must have come from [`dyncomplete_table_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_table_free(t: *mut DynTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Full dimension-table report as JSON.
///
/// # Safety
/// `t` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_table_report(t: *const DynTable) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    match serde_json::to_value(TableReport::new(table)) {
        Ok(v) => output(v),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// All thick subcategories (= all completions) as JSON.
///
/// # Safety
/// `t` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_enumerate_thick(
    t: *const DynTable,
    cap: usize,
) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    match complete::enumerate_thick(table, cap) {
        Ok(thicks) => output(serde_json::json!({
            "v": 1,
            "count": thicks.len(),
            "thick_subcategories": thicks
                .iter()
                .map(|s| s.to_json(table))
                .collect::<Vec<_>>(),
        })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Completion report for a metric given as JSON.
///
/// # Safety
/// `t` must be a live table handle; `metric_json` a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_completion(
    t: *const DynTable,
    metric_json: *const c_char,
) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    let Ok(metric) = metric_arg(table, metric_json) else {
        return ptr::null_mut();
    };
    match complete::completion(table, &metric) {
        Ok(rep) => output(completion_report_json(table, &rep)),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Compactly and weakly compactly supported objects as JSON.
///
/// # Safety
/// As for [`dyncomplete_completion`].
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_supports(
    t: *const DynTable,
    metric_json: *const c_char,
) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    let Ok(metric) = metric_arg(table, metric_json) else {
        return ptr::null_mut();
    };
    match complete::supports(table, &metric) {
        Ok((compact, weak)) => output(serde_json::json!({
            "v": 1,
            "compact": compact.to_json(table),
            "weak": weak.to_json(table),
        })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Metric axioms verdict as JSON.
///
/// # Safety
/// As for [`dyncomplete_completion`].
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_metric_check(
    t: *const DynTable,
    metric_json: *const c_char,
) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    let Ok(metric) = metric_arg(table, metric_json) else {
        return ptr::null_mut();
    };
    let v = metric.validate();
    output(serde_json::json!({
        "v": 1,
        "is_metric": v.is_metric,
        "is_good": v.is_good,
        "witnesses": v.witnesses,
        "extension_closed": ext_status_json(&v.extension_closed),
    }))
}

/// Improvement (coarsest good refinement) of a metric, as metric JSON.
///
/// # Safety
/// As for [`dyncomplete_completion`].
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_metric_improve(
    t: *const DynTable,
    metric_json: *const c_char,
) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    let Ok(metric) = metric_arg(table, metric_json) else {
        return ptr::null_mut();
    };
    match metric.improvement() {
        Ok(imp) => output(imp.to_json(table)),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Refinement comparison of two metrics; the verdict is one of
/// "m1 <= m2", "m2 <= m1", "equivalent", "incomparable", "unknown".
///
/// # Safety
/// As for [`dyncomplete_completion`].
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_metric_compare(
    t: *const DynTable,
    metric1_json: *const c_char,
    metric2_json: *const c_char,
) -> *mut c_char {
    clear_error();
    let Ok(table) = table_arg(t) else {
        return ptr::null_mut();
    };
    let Ok(m1) = metric_arg(table, metric1_json) else {
        return ptr::null_mut();
    };
    let Ok(m2) = metric_arg(table, metric2_json) else {
        return ptr::null_mut();
    };
    output(serde_json::json!({
        "v": 1,
        "verdict": m1.compare(&m2).to_string(),
    }))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have been returned by a function of this library and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn dyncomplete_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
