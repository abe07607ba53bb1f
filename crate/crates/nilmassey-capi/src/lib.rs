//! C ABI over the core pipelines. Handles are opaque pointers owned by the
//! caller and released with the matching `_free`; every fallible call
//! returns a status code and leaves a message for [`nm_last_error`]. JSON
//! crosses the boundary as NUL-terminated UTF-8 strings; strings returned
//! by this library are released with [`nm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nilmassey::action::ActionSpec;
use nilmassey::cohomology::NACocycle;
use nilmassey::obstruction::verify_main_theorem;
use nilmassey::scenario::{parse_file, run_file, run_generated, Profile};

/// Status code returned by every fallible entry point.
#[repr(i32)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum NmStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// JSON could not be parsed into the expected shape.
    ParseError = 3,
    /// The action failed one of its defining axioms.
    InvalidAction = 4,
    /// The cocycle failed its law against the given action.
    InvalidCocycle = 5,
    /// A pipeline computation rejected the inputs.
    ComputeError = 6,
    /// An internal invariant was violated; the message has the details.
    InternalError = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// The message for the most recent non-OK status on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// An action of a finite group on the free nilpotent group, validated on
/// construction. Opaque; create with `nm_action_from_json`, release with
/// `nm_action_free`.
pub struct NmAction {
    inner: ActionSpec,
}

/// A nonabelian cocycle for some action. Opaque; create with
/// `nm_cocycle_from_json`, release with `nm_cocycle_free`.
pub struct NmCocycle {
    inner: NACocycle,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, NmStatus> {
    if ptr.is_null() {
        set_error("string argument is NULL");
        return Err(NmStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        NmStatus::InvalidUtf8
    })
}

fn write_string(s: String, out: *mut *mut c_char) -> NmStatus {
    let c = match CString::new(s) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL byte");
            return NmStatus::InternalError;
        }
    };
    unsafe { *out = c.into_raw() };
    NmStatus::Ok
}

fn guarded(f: impl FnOnce() -> NmStatus) -> NmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            set_error(&msg);
            NmStatus::InternalError
        }
    }
}

/// Parse an action from JSON (either the full table form or the compact
/// cyclic form) and validate it. On success `*out` owns the handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_action_from_json(
    json: *const c_char,
    out: *mut *mut NmAction,
) -> NmStatus {
    if out.is_null() {
        set_error("out pointer is NULL");
        return NmStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let text = match read_str(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guarded(|| {
        let dto = match serde_json::from_str(text) {
            Ok(d) => d,
            Err(e) => {
                set_error(&format!("action JSON: {e}"));
                return NmStatus::ParseError;
            }
        };
        let spec = match ActionSpec::from_json(&dto) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ParseError;
            }
        };
        let report = spec.validate();
        if let Some(e) = report.failures.first() {
            set_error(&e.to_string());
            return NmStatus::InvalidAction;
        }
        unsafe { *out = Box::into_raw(Box::new(NmAction { inner: spec })) };
        NmStatus::Ok
    })
}

/// Serialize an action back to its full JSON form.
///
/// # Safety
/// `action` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_action_to_json(
    action: *const NmAction,
    out: *mut *mut c_char,
) -> NmStatus {
    if action.is_null() || out.is_null() {
        set_error("argument is NULL");
        return NmStatus::NullPointer;
    }
    let spec = &(*action).inner;
    guarded(|| match serde_json::to_string_pretty(&spec.to_json()) {
        Ok(s) => write_string(s, out),
        Err(e) => {
            set_error(&e.to_string());
            NmStatus::InternalError
        }
    })
}

/// The truncation order n of the action's target group. Zero when the
/// handle is NULL.
#[no_mangle]
pub extern "C" fn nm_action_order(action: *const NmAction) -> u64 {
    if action.is_null() {
        return 0;
    }
    unsafe { (*action).inner.n() as u64 }
}

/// The coefficient modulus m. Zero when the handle is NULL.
#[no_mangle]
pub extern "C" fn nm_action_modulus(action: *const NmAction) -> u64 {
    if action.is_null() {
        return 0;
    }
    unsafe { (*action).inner.modulus().get() }
}

/// The order of the acting group. Zero when the handle is NULL.
#[no_mangle]
pub extern "C" fn nm_action_group_order(action: *const NmAction) -> u64 {
    if action.is_null() {
        return 0;
    }
    unsafe { (*action).inner.group().order() as u64 }
}

/// Release an action handle. NULL is ignored.
///
/// # Safety
/// `action` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn nm_action_free(action: *mut NmAction) {
    if !action.is_null() {
        drop(Box::from_raw(action));
    }
}

/// Parse a cocycle from its JSON form and check its law against the given
/// action. On success `*out` owns the handle.
///
/// # Safety
/// `action` must be a live handle, `json` a NUL-terminated string, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_cocycle_from_json(
    action: *const NmAction,
    json: *const c_char,
    out: *mut *mut NmCocycle,
) -> NmStatus {
    if action.is_null() || out.is_null() {
        set_error("argument is NULL");
        return NmStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let text = match read_str(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let spec = &(*action).inner;
    guarded(|| {
        let dto = match serde_json::from_str(text) {
            Ok(d) => d,
            Err(e) => {
                set_error(&format!("cocycle JSON: {e}"));
                return NmStatus::ParseError;
            }
        };
        let q = match NACocycle::from_json(&dto) {
            Ok(q) => q,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ParseError;
            }
        };
        if let Err(e) = q.validate(spec) {
            set_error(&e.to_string());
            return NmStatus::InvalidCocycle;
        }
        unsafe { *out = Box::into_raw(Box::new(NmCocycle { inner: q })) };
        NmStatus::Ok
    })
}

/// The level of the cocycle. Zero when the handle is NULL.
#[no_mangle]
pub extern "C" fn nm_cocycle_level(cocycle: *const NmCocycle) -> u64 {
    if cocycle.is_null() {
        return 0;
    }
    unsafe { (*cocycle).inner.level() as u64 }
}

/// Release a cocycle handle. NULL is ignored.
///
/// # Safety
/// `cocycle` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn nm_cocycle_free(cocycle: *mut NmCocycle) {
    if !cocycle.is_null() {
        drop(Box::from_raw(cocycle));
    }
}

/// Run the full obstruction verification for one action/cocycle pair and
/// return the report as JSON in `*out`. The cocycle must sit one level
/// above the action's truncation order.
///
/// # Safety
/// `action` and `cocycle` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_verify(
    action: *const NmAction,
    cocycle: *const NmCocycle,
    out: *mut *mut c_char,
) -> NmStatus {
    if action.is_null() || cocycle.is_null() || out.is_null() {
        set_error("argument is NULL");
        return NmStatus::NullPointer;
    }
    let spec = &(*action).inner;
    let q = &(*cocycle).inner;
    guarded(|| {
        let report = match verify_main_theorem(spec, q) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ComputeError;
            }
        };
        match serde_json::to_string_pretty(&report) {
            Ok(s) => write_string(s, out),
            Err(e) => {
                set_error(&e.to_string());
                NmStatus::InternalError
            }
        }
    })
}

/// Parse a scenario file, run every scenario, and return the report file
/// as JSON in `*out`. `seed` drives any randomized responses in the runs.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_run_scenarios(
    json: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> NmStatus {
    if out.is_null() {
        set_error("out pointer is NULL");
        return NmStatus::NullPointer;
    }
    let text = match read_str(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guarded(|| {
        let file = match parse_file(text) {
            Ok(f) => f,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ParseError;
            }
        };
        let report = match run_file(&file, seed) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ComputeError;
            }
        };
        match serde_json::to_string_pretty(&report) {
            Ok(s) => write_string(s, out),
            Err(e) => {
                set_error(&e.to_string());
                NmStatus::InternalError
            }
        }
    })
}

/// Generate `count` scenarios from the named profile ("default" or
/// "nontrivial-h2"), run them, and return the report file as JSON in
/// `*out`. Identical arguments produce byte-identical output.
///
/// # Safety
/// `profile` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nm_random_suite(
    count: u64,
    seed: u64,
    profile: *const c_char,
    out: *mut *mut c_char,
) -> NmStatus {
    if out.is_null() {
        set_error("out pointer is NULL");
        return NmStatus::NullPointer;
    }
    let name = match read_str(profile) {
        Ok(t) => t,
        Err(s) => return s,
    };
    guarded(|| {
        let profile = match Profile::parse(name) {
            Ok(p) => p,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ParseError;
            }
        };
        let report = match run_generated(count as usize, seed, profile) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return NmStatus::ComputeError;
            }
        };
        match serde_json::to_string_pretty(&report) {
            Ok(s) => write_string(s, out),
            Err(e) => {
                set_error(&e.to_string());
                NmStatus::InternalError
            }
        }
    })
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn nm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
