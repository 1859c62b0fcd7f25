//! C interface to the `uavmec` planner.
//!
//! Scenarios and plans are opaque handles created by this library and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`UavmecStatus`]; on failure a description is kept per thread and can be
//! copied out with [`uavmec_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use uavmec::io::{load_scenario, parse_scenario, solve_scheme};
use uavmec::{Error, MissionPlan, Scenario, Scheme, SolverConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavmecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SolverError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Design to solve with.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavmecScheme {
    Proposed = 0,
    Straight = 1,
    HoverFly = 2,
}

impl From<UavmecScheme> for Scheme {
    fn from(s: UavmecScheme) -> Self {
        match s {
            UavmecScheme::Proposed => Scheme::Proposed,
            UavmecScheme::Straight => Scheme::Straight,
            UavmecScheme::HoverFly => Scheme::HoverFly,
        }
    }
}

/// Opaque scenario handle.
pub struct UavmecScenario(Scenario);

/// Opaque plan handle.
pub struct UavmecPlan(MissionPlan);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: UavmecStatus, msg: impl Into<String>) -> UavmecStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> UavmecStatus {
    let status = match &e {
        Error::ScenarioFile { .. } => UavmecStatus::ParseError,
        _ if e.is_input_error() => UavmecStatus::InvalidArgument,
        _ => UavmecStatus::SolverError,
    };
    fail(status, e.to_string())
}

/// Run `f`, converting a panic into [`UavmecStatus::Panic`].
fn guard(f: impl FnOnce() -> UavmecStatus) -> UavmecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == UavmecStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(UavmecStatus::Panic, "internal panic"),
    }
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, UavmecStatus> {
    if p.is_null() {
        return Err(fail(UavmecStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(UavmecStatus::InvalidArgument, "string is not valid UTF-8"))
}

fn store_scenario(s: Scenario, out: *mut *mut UavmecScenario) -> UavmecStatus {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(UavmecScenario(s))) };
    UavmecStatus::Ok
}

/// Load a scenario file. On success `*out` receives a handle to free with
/// `uavmec_scenario_free`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavmec_scenario_load(path: *const c_char, out: *mut *mut UavmecScenario) -> UavmecStatus {
    guard(|| {
        if out.is_null() {
            return fail(UavmecStatus::NullPointer, "null output pointer");
        }
        let path = match c_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_scenario(path) {
            Ok(s) => store_scenario(s, out),
            Err(e) => from_error(e),
        }
    })
}

/// Parse scenario text in the same format as scenario files.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavmec_scenario_parse(text: *const c_char, out: *mut *mut UavmecScenario) -> UavmecStatus {
    guard(|| {
        if out.is_null() {
            return fail(UavmecStatus::NullPointer, "null output pointer");
        }
        let text = match c_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_scenario(text, "<string>") {
            Ok(s) => store_scenario(s, out),
            Err(e) => from_error(e),
        }
    })
}

/// Replace the task size (bits).
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uavmec_scenario_set_task_bits(scenario: *mut UavmecScenario, task_bits: f64) -> UavmecStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else { return fail(UavmecStatus::NullPointer, "null scenario") };
        match s.0.with_task_bits(task_bits) {
            Ok(updated) => {
                s.0 = updated;
                UavmecStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Number of GBSs in the scenario; 0 for a null handle.
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uavmec_scenario_num_gbs(scenario: *const UavmecScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.num_gbs())
}

/// Release a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uavmec_scenario_free(scenario: *mut UavmecScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Minimum-time plan with default solver settings. On success `*out`
/// receives a handle to free with `uavmec_plan_free`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uavmec_solve(
    scenario: *const UavmecScenario,
    scheme: UavmecScheme,
    out: *mut *mut UavmecPlan,
) -> UavmecStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else { return fail(UavmecStatus::NullPointer, "null scenario") };
        if out.is_null() {
            return fail(UavmecStatus::NullPointer, "null output pointer");
        }
        match solve_scheme(&s.0, scheme.into(), &SolverConfig::default()) {
            Ok(plan) => {
                *out = Box::into_raw(Box::new(UavmecPlan(plan)));
                UavmecStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of slots `N`; 0 for a null handle.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_n_slots(plan: *const UavmecPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.0.n_slots)
}

/// Mission completion time in seconds; NaN for a null handle.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_completion_time(plan: *const UavmecPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| p.0.completion_time)
}

/// Total offloaded bits; NaN for a null handle.
///
/// # Safety
/// `plan` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_achieved_bits(plan: *const UavmecPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| p.0.achieved_bits)
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> UavmecStatus {
    if let Some(n) = needed.as_mut() {
        *n = values.len();
    }
    if len < values.len() {
        return fail(UavmecStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", values.len()));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return fail(UavmecStatus::NullPointer, "null buffer");
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    UavmecStatus::Ok
}

/// Copy the trajectory as `x0, y0, x1, y1, …` (`2·(N+1)` values). `*needed`
/// always receives the required length, so a first call with `len = 0`
/// sizes the buffer.
///
/// # Safety
/// `plan` must be a live handle, `buf` valid for `len` writes, and `needed`
/// valid or null.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_trajectory(
    plan: *const UavmecPlan,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> UavmecStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return fail(UavmecStatus::NullPointer, "null plan") };
        let xy: Vec<f64> = p.0.trajectory.positions().iter().flat_map(|u| [u.x, u.y]).collect();
        copy_out(&xy, buf, len, needed)
    })
}

/// Copy the time allocation, slot-major: `tau[(n-1)·K + k]` for slots
/// `n = 1..N` (`N·K` values).
///
/// # Safety
/// As for `uavmec_plan_trajectory`.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_allocation(
    plan: *const UavmecPlan,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> UavmecStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return fail(UavmecStatus::NullPointer, "null plan") };
        copy_out(p.0.allocation.values(), buf, len, needed)
    })
}

/// Copy the bits delivered to each GBS (`K` values).
///
/// # Safety
/// As for `uavmec_plan_trajectory`.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_bits_per_gbs(
    plan: *const UavmecPlan,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> UavmecStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else { return fail(UavmecStatus::NullPointer, "null plan") };
        copy_out(&p.0.bits_per_gbs, buf, len, needed)
    })
}

/// Release a plan. Null is ignored.
///
/// # Safety
/// `plan` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uavmec_plan_free(plan: *mut UavmecPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Copy this thread's last error message into `buf` as a NUL-terminated
/// string, truncated to `len` bytes. Returns the length the full message
/// needs including the terminator; empty after a successful call.
///
/// # Safety
/// `buf` must be valid for `len` writes, or null with `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn uavmec_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uavmec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
