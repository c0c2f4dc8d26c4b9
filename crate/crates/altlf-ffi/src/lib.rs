//! C interface to the monitor compiler.
//!
//! A monitor is compiled from property source text (declarations followed by
//! a formula) into an opaque `AltlfMonitor`. Sessions hold a shared reference
//! to their monitor, so the monitor may be freed while sessions are alive.
//! Functions return an `AltlfStatus`; on failure `altlf_last_error` gives a
//! message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::sync::Arc;

use altlf::formula::parse_property_file;
use altlf::monitor::{Monitor, Options, Session};
use altlf::trace::Assignment;
use altlf::{Error, Verdict};
use num_bigint::BigInt;
use num_rational::BigRational;

/// Status codes. The non-zero values 2, 3 and 4 match the exit codes of the
/// command-line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AltlfStatus {
    Ok = 0,
    Error = 1,
    Parse = 2,
    UnsupportedGc = 3,
    NodeLimit = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    BadValue = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AltlfVerdict {
    PermanentlySatisfied = 0,
    CurrentlySatisfied = 1,
    CurrentlyViolated = 2,
    PermanentlyViolated = 3,
    /// The constraint graph exceeded its node limit.
    Unknown = 4,
}

impl From<Verdict> for AltlfVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::PS => AltlfVerdict::PermanentlySatisfied,
            Verdict::CS => AltlfVerdict::CurrentlySatisfied,
            Verdict::CV => AltlfVerdict::CurrentlyViolated,
            Verdict::PV => AltlfVerdict::PermanentlyViolated,
        }
    }
}

/// A compiled property.
pub struct AltlfMonitor {
    monitor: Arc<Monitor>,
    names: Vec<CString>,
    class: CString,
}

/// Monitoring state of one trace.
pub struct AltlfSession {
    session: Session<Arc<Monitor>>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: AltlfStatus, msg: impl Into<String>) -> AltlfStatus {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

fn fail_with(e: &Error) -> AltlfStatus {
    let status = match e {
        Error::Parse { .. } => AltlfStatus::Parse,
        Error::UnsupportedGc => AltlfStatus::UnsupportedGc,
        Error::NodeLimit(_) => AltlfStatus::NodeLimit,
        Error::Trace(_) => AltlfStatus::BadValue,
        _ => AltlfStatus::Error,
    };
    fail(status, e.to_string())
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn altlf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Compiles `property` (NUL-terminated UTF-8) with a constraint-graph node
/// limit of `node_limit` (0 for the default). On success stores a new monitor
/// in `*out`, to be released with `altlf_monitor_free`.
///
/// # Safety
/// `property` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn altlf_monitor_new(
    property: *const c_char,
    node_limit: usize,
    out: *mut *mut AltlfMonitor,
) -> AltlfStatus {
    if property.is_null() || out.is_null() {
        return fail(AltlfStatus::NullPointer, "null argument to altlf_monitor_new");
    }
    *out = ptr::null_mut();
    let Ok(src) = CStr::from_ptr(property).to_str() else {
        return fail(AltlfStatus::InvalidUtf8, "property is not valid UTF-8");
    };
    let parsed = match parse_property_file(src) {
        Ok(p) => p,
        Err(e) => return fail_with(&e),
    };
    let mut opts = Options::default();
    if node_limit > 0 {
        opts.node_limit = node_limit;
    }
    let monitor = match Monitor::new(&parsed.formula, &parsed.decls, &opts) {
        Ok(m) => m,
        Err(e) => return fail_with(&e),
    };
    let names = parsed.decls.names().map(|n| CString::new(n.as_bytes()).unwrap()).collect();
    let class = CString::new(monitor.class.to_string()).unwrap();
    *out = Box::into_raw(Box::new(AltlfMonitor { monitor: Arc::new(monitor), names, class }));
    AltlfStatus::Ok
}

/// # Safety
/// `monitor` must come from `altlf_monitor_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn altlf_monitor_free(monitor: *mut AltlfMonitor) {
    if !monitor.is_null() {
        drop(Box::from_raw(monitor));
    }
}

/// Number of declared variables; values passed to `altlf_session_step`
/// follow this order.
///
/// # Safety
/// `monitor` must be a live monitor.
#[no_mangle]
pub unsafe extern "C" fn altlf_monitor_variable_count(monitor: *const AltlfMonitor) -> usize {
    monitor.as_ref().map_or(0, |m| m.names.len())
}

/// Name of the `index`-th variable, or null when out of range. Owned by the
/// monitor.
///
/// # Safety
/// `monitor` must be a live monitor.
#[no_mangle]
pub unsafe extern "C" fn altlf_monitor_variable_name(monitor: *const AltlfMonitor, index: usize) -> *const c_char {
    match monitor.as_ref().and_then(|m| m.names.get(index)) {
        Some(n) => n.as_ptr(),
        None => ptr::null(),
    }
}

/// Detected property class, such as `MC_Q`. Owned by the monitor.
///
/// # Safety
/// `monitor` must be a live monitor.
#[no_mangle]
pub unsafe extern "C" fn altlf_monitor_class(monitor: *const AltlfMonitor) -> *const c_char {
    monitor.as_ref().map_or(ptr::null(), |m| m.class.as_ptr())
}

/// A new session at the empty trace, or null if `monitor` is null. Release
/// with `altlf_session_free`.
///
/// # Safety
/// `monitor` must be a live monitor.
#[no_mangle]
pub unsafe extern "C" fn altlf_session_new(monitor: *const AltlfMonitor) -> *mut AltlfSession {
    match monitor.as_ref() {
        Some(m) => Box::into_raw(Box::new(AltlfSession { session: Session::new(m.monitor.clone()) })),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `session` must come from `altlf_session_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn altlf_session_free(session: *mut AltlfSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Appends one assignment, value `i` being `numerators[i] / denominators[i]`
/// for the `i`-th declared variable, and stores the verdict of the new prefix
/// in `*verdict`. A node-limit failure stores `Unknown`, returns
/// `NodeLimit` and leaves the session usable.
///
/// # Safety
/// The arrays must hold `count` elements; `session` and `verdict` must be valid.
#[no_mangle]
pub unsafe extern "C" fn altlf_session_step(
    session: *mut AltlfSession,
    numerators: *const i64,
    denominators: *const i64,
    count: usize,
    verdict: *mut AltlfVerdict,
) -> AltlfStatus {
    let Some(s) = session.as_mut() else {
        return fail(AltlfStatus::NullPointer, "null session");
    };
    if verdict.is_null() || (count > 0 && (numerators.is_null() || denominators.is_null())) {
        return fail(AltlfStatus::NullPointer, "null argument to altlf_session_step");
    }
    let monitor = s.session.monitor().clone();
    let names: Vec<_> = monitor.decls.names().cloned().collect();
    if count != names.len() {
        return fail(AltlfStatus::BadValue, format!("expected {} values, got {count}", names.len()));
    }
    let mut a = Assignment::new();
    for (i, name) in names.into_iter().enumerate() {
        let (n, d) = (*numerators.add(i), *denominators.add(i));
        if d == 0 {
            return fail(AltlfStatus::BadValue, format!("zero denominator for `{name}`"));
        }
        a.insert(name, BigRational::new(BigInt::from(n), BigInt::from(d)));
    }
    match s.session.step(&a) {
        Ok(v) => {
            *verdict = v.into();
            AltlfStatus::Ok
        }
        Err(e) => {
            if matches!(e, Error::NodeLimit(_)) {
                *verdict = AltlfVerdict::Unknown;
            }
            fail_with(&e)
        }
    }
}

/// Number of assignments read so far.
///
/// # Safety
/// `session` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn altlf_session_len(session: *const AltlfSession) -> usize {
    session.as_ref().map_or(0, |s| s.session.len())
}
