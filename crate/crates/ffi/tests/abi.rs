use std::ffi::{c_char, CStr, CString};
use std::ptr;

use stable_persuasion_ffi::*;

const EXAMPLE1: &str = include_str!("../../core/fixtures/example1.json");
const EXAMPLE2: &str = include_str!("../../core/fixtures/example2.json");

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    sp_string_free(s);
    out
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn oracle_round_trip() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(sp_instance_from_json(c(EXAMPLE1).as_ptr(), &mut inst), SpStatus::Ok);
        assert_eq!(sp_instance_agents(inst), 2);
        let mut sol = ptr::null_mut();
        assert_eq!(sp_solve_oracle_public(inst, &mut sol), SpStatus::Ok);
        assert_eq!(take(sp_solution_value(sol)), "1");
        let policy = take(sp_solution_policy_json(sol));
        let mut stable = false;
        assert_eq!(sp_check_policy(inst, c(&policy).as_ptr(), &mut stable), SpStatus::Ok);
        assert!(stable);
        sp_solution_free(sol);
        sp_instance_free(inst);
    }
}

#[test]
fn worlds_solver_reports_label() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(sp_instance_from_json(c(EXAMPLE1).as_ptr(), &mut inst), SpStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(sp_solve_worlds_public(inst, 3, &mut sol), SpStatus::Ok);
        assert!(take(sp_solution_label(sol)).starts_with("heuristic"));
        sp_solution_free(sol);
        assert_eq!(sp_solve_worlds_public(inst, 1, &mut sol), SpStatus::Capacity);
        assert!(sol.is_null());
        sp_instance_free(inst);
    }
}

#[test]
fn typed_private_value() {
    unsafe {
        let mut ti = ptr::null_mut();
        assert_eq!(sp_typed_instance_from_json(c(EXAMPLE2).as_ptr(), &mut ti), SpStatus::Ok);
        let mut sol = ptr::null_mut();
        assert_eq!(sp_solve_typed(ti, true, &mut sol), SpStatus::Ok);
        assert_eq!(take(sp_solution_value(sol)), "4");
        sp_solution_free(sol);
        sp_typed_instance_free(ti);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(sp_instance_from_json(c("{oops").as_ptr(), &mut inst), SpStatus::Input);
        assert!(inst.is_null());
        assert!(take(sp_last_error_message()).contains("invalid JSON"));
        assert_eq!(sp_instance_from_json(ptr::null(), &mut inst), SpStatus::NullArgument);
        assert_eq!(sp_instance_from_json(c(EXAMPLE1).as_ptr(), ptr::null_mut()), SpStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(sp_instance_from_json(bad.as_ptr() as *const c_char, &mut inst), SpStatus::InvalidUtf8);
        sp_instance_free(ptr::null_mut());
        sp_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stable_persuasion.h")).unwrap();
    for name in [
        "typedef struct SpInstance SpInstance",
        "typedef struct SpSolution SpSolution",
        "SP_STATUS_CAPACITY",
        "sp_instance_from_json",
        "sp_solve_typed",
        "sp_string_free",
        "sp_last_error_message",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
