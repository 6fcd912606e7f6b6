//! C ABI over the solvers. Every handle is opaque and owned by the caller,
//! who releases it with the matching `*_free` function. Strings returned by
//! the library are released with `sp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use stable_persuasion::io::{instance_from_value, parse_json, parse_policy, policy_to_json};
use stable_persuasion::model::{bayes_plausible, is_stable_policy, Instance, Policy};
use stable_persuasion::oracle::solve_oracle_public;
use stable_persuasion::rational::fmt_q;
use stable_persuasion::typed::{
    parse_typed_instance, solve_private_typed, solve_public_typed, typed_policy_to_json, TypedCaps, TypedInstance,
};
use stable_persuasion::worlds::{solve_public_small_worlds, WorldsCaps};
use stable_persuasion::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Input = 3,
    Capacity = 4,
    Precondition = 5,
    Internal = 6,
}

/// A parsed market.
pub struct SpInstance {
    inner: Instance,
}

/// A parsed market with agent types.
pub struct SpTypedInstance {
    inner: TypedInstance,
}

/// An optimal value with its policy rendered as JSON.
pub struct SpSolution {
    value: CString,
    policy: CString,
    label: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> SpStatus {
    let status = match &e {
        Error::Input(_) => SpStatus::Input,
        Error::Capacity(_) => SpStatus::Capacity,
        Error::Precondition(_) => SpStatus::Precondition,
        Error::UnreachableSignal(_) | Error::Internal(_) => SpStatus::Internal,
    };
    set_error(e.to_string());
    status
}

fn cstring(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior nul removed")
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SpStatus> {
    if s.is_null() {
        set_error("null string argument".into());
        return Err(SpStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        SpStatus::InvalidUtf8
    })
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> SpStatus {
    *out = Box::into_raw(Box::new(value));
    SpStatus::Ok
}

fn solution(value: String, policy: String, label: &str) -> SpSolution {
    SpSolution { value: cstring(value), policy: cstring(policy), label: cstring(label.to_string()) }
}

/// Message describing the most recent failure on this thread, or null.
/// The caller owns the returned string.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_instance_from_json(json: *const c_char, out: *mut *mut SpInstance) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match read_str(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match parse_json(text).and_then(|v| instance_from_value(&v)) {
        Ok(inner) => put(out, SpInstance { inner }),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `inst` must be null or a handle from `sp_instance_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_instance_free(inst: *mut SpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Agents per side.
///
/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_instance_agents(inst: *const SpInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n())
}

/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_typed_instance_from_json(json: *const c_char, out: *mut *mut SpTypedInstance) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match read_str(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match parse_typed_instance(text) {
        Ok(inner) => put(out, SpTypedInstance { inner }),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `inst` must be null or a handle from `sp_typed_instance_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_typed_instance_free(inst: *mut SpTypedInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Exhaustive optimal public policy for markets with at most three agents per side.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_solve_oracle_public(inst: *const SpInstance, out: *mut *mut SpSolution) -> SpStatus {
    if inst.is_null() || out.is_null() {
        return SpStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let inst = &(*inst).inner;
    match solve_oracle_public(inst) {
        Ok(r) => {
            let policy = policy_to_json(&Policy::Public(r.policy), inst).to_string();
            put(out, solution(fmt_q(&r.value), policy, "optimal (exhaustive)"))
        }
        Err(e) => fail(e),
    }
}

/// Optimal public policy for few worlds; the label reports whether optimality is certified.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_solve_worlds_public(
    inst: *const SpInstance,
    max_worlds: usize,
    out: *mut *mut SpSolution,
) -> SpStatus {
    if inst.is_null() || out.is_null() {
        return SpStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let inst = &(*inst).inner;
    let caps = WorldsCaps { worlds: max_worlds, ..WorldsCaps::default() };
    match solve_public_small_worlds(inst, caps) {
        Ok(sol) => {
            let policy = policy_to_json(&Policy::Public(sol.policy.clone()), inst).to_string();
            put(out, solution(fmt_q(&sol.value), policy, sol.label()))
        }
        Err(e) => fail(e),
    }
}

/// Optimal public (`private_signals == false`) or private policy of a typed market.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_solve_typed(
    inst: *const SpTypedInstance,
    private_signals: bool,
    out: *mut *mut SpSolution,
) -> SpStatus {
    if inst.is_null() || out.is_null() {
        return SpStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let ti = &(*inst).inner;
    let caps = TypedCaps::default();
    let res = if private_signals { solve_private_typed(ti, caps) } else { solve_public_typed(ti, caps) };
    match res {
        Ok(sol) => {
            let policy = typed_policy_to_json(ti, &sol.policy).to_string();
            put(out, solution(fmt_q(&sol.value), policy, "optimal"))
        }
        Err(e) => fail(e),
    }
}

/// Optimal value as an exact rational such as `"3/4"`. The caller owns the string.
///
/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_value(sol: *const SpSolution) -> *mut c_char {
    sol.as_ref().map_or(ptr::null_mut(), |s| s.value.clone().into_raw())
}

/// Policy as JSON. The caller owns the string.
///
/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_policy_json(sol: *const SpSolution) -> *mut c_char {
    sol.as_ref().map_or(ptr::null_mut(), |s| s.policy.clone().into_raw())
}

/// Optimality label. The caller owns the string.
///
/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_label(sol: *const SpSolution) -> *mut c_char {
    sol.as_ref().map_or(ptr::null_mut(), |s| s.label.clone().into_raw())
}

/// # Safety
/// `sol` must be null or a handle returned by a solver and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_free(sol: *mut SpSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Writes whether the policy is stable and Bayes-plausible into `stable`.
///
/// # Safety
/// `inst` must be a live handle, `policy_json` a valid C string and `stable` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_check_policy(
    inst: *const SpInstance,
    policy_json: *const c_char,
    stable: *mut bool,
) -> SpStatus {
    if inst.is_null() || stable.is_null() {
        return SpStatus::NullArgument;
    }
    let text = match read_str(policy_json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let inst = &(*inst).inner;
    let verdict = parse_policy(text, inst).and_then(|p| Ok(is_stable_policy(inst, &p)?.stable && bayes_plausible(inst, &p)));
    match verdict {
        Ok(v) => {
            *stable = v;
            SpStatus::Ok
        }
        Err(e) => fail(e),
    }
}
