use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use uavmec_ffi::*;

fn scenario_path(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        uavmec_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

unsafe fn load(name: &str) -> *mut UavmecScenario {
    let mut s = ptr::null_mut();
    assert_eq!(uavmec_scenario_load(scenario_path(name).as_ptr(), &mut s), UavmecStatus::Ok, "{}", last_error());
    s
}

#[test]
fn hover_scenario_round_trip() {
    unsafe {
        let s = load("hover.toml");
        assert_eq!(uavmec_scenario_num_gbs(s), 1);
        for scheme in [UavmecScheme::Proposed, UavmecScheme::Straight, UavmecScheme::HoverFly] {
            let mut plan = ptr::null_mut();
            assert_eq!(uavmec_solve(s, scheme, &mut plan), UavmecStatus::Ok, "{}", last_error());
            assert_eq!(uavmec_plan_n_slots(plan), 5);
            assert_eq!(uavmec_plan_completion_time(plan), 5.0);
            assert!((uavmec_plan_achieved_bits(plan) - 1e7).abs() < 1e-3);

            let mut needed = 0;
            assert_eq!(uavmec_plan_trajectory(plan, ptr::null_mut(), 0, &mut needed), UavmecStatus::BufferTooSmall);
            assert_eq!(needed, 12);
            let mut xy = vec![f64::NAN; needed];
            assert_eq!(uavmec_plan_trajectory(plan, xy.as_mut_ptr(), xy.len(), &mut needed), UavmecStatus::Ok);
            assert!(xy.iter().all(|&v| v == 0.0));

            let mut tau = vec![0.0; 5];
            assert_eq!(uavmec_plan_allocation(plan, tau.as_mut_ptr(), tau.len(), ptr::null_mut()), UavmecStatus::Ok);
            assert!(tau.iter().all(|&t| (0.0..=1.0 + 1e-12).contains(&t)));
            let mut bits = [0.0; 1];
            assert_eq!(uavmec_plan_bits_per_gbs(plan, bits.as_mut_ptr(), 1, ptr::null_mut()), UavmecStatus::Ok);
            assert!((bits[0] - 1e7).abs() < 1e-3);
            uavmec_plan_free(plan);
        }
        uavmec_scenario_free(s);
    }
}

#[test]
fn task_size_can_be_changed() {
    unsafe {
        let s = load("travel.toml");
        assert_eq!(uavmec_scenario_set_task_bits(s, 0.0), UavmecStatus::Ok);
        let mut plan = ptr::null_mut();
        assert_eq!(uavmec_solve(s, UavmecScheme::Straight, &mut plan), UavmecStatus::Ok);
        assert_eq!(uavmec_plan_n_slots(plan), 20);
        uavmec_plan_free(plan);
        assert_eq!(uavmec_scenario_set_task_bits(s, -1.0), UavmecStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        uavmec_scenario_free(s);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(uavmec_scenario_load(scenario_path("missing.toml").as_ptr(), &mut s), UavmecStatus::ParseError);
        assert!(s.is_null());
        assert!(last_error().contains("missing.toml"));

        let text = CString::new("[uav]\naltitude_m = 50.0\nspeed = 3\n").unwrap();
        assert_eq!(uavmec_scenario_parse(text.as_ptr(), &mut s), UavmecStatus::ParseError);
        assert!(last_error().contains("line"), "{}", last_error());

        assert_eq!(uavmec_scenario_load(ptr::null(), &mut s), UavmecStatus::NullPointer);
        assert_eq!(uavmec_solve(ptr::null(), UavmecScheme::Proposed, ptr::null_mut()), UavmecStatus::NullPointer);
        assert_eq!(uavmec_plan_n_slots(ptr::null()), 0);
        assert!(uavmec_plan_completion_time(ptr::null()).is_nan());
        uavmec_plan_free(ptr::null_mut());
        uavmec_scenario_free(ptr::null_mut());

        // Truncation keeps the terminator and reports the full size.
        let mut small = [0 as std::ffi::c_char; 4];
        let full = uavmec_last_error_message(small.as_mut_ptr(), small.len());
        assert!(full > 4);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 3);

        let s = load("hover.toml");
        assert_eq!(last_error(), "");
        uavmec_scenario_free(s);
        assert_eq!(CStr::from_ptr(uavmec_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("uavmec.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "uavmec_scenario_load",
        "uavmec_scenario_parse",
        "uavmec_scenario_free",
        "uavmec_solve",
        "uavmec_plan_trajectory",
        "uavmec_plan_free",
        "uavmec_last_error_message",
        "typedef struct UavmecPlan UavmecPlan",
        "UAVMEC_STATUS_BUFFER_TOO_SMALL = 5",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

/// Compile and run a small C program against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links_and_solves() {
    let exe = std::env::current_exe().unwrap();
    let archive = exe.parent().and_then(Path::parent).map(|d| d.join("libuavmec_ffi.a"));
    let Some(archive) = archive.filter(|a| a.exists()) else {
        eprintln!("static library not found next to the test binary; skipping");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = std::env::temp_dir().join(format!("uavmec_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "uavmec.h"
int main(int argc, char **argv) {
    UavmecScenario *s = NULL;
    if (uavmec_scenario_load(argv[1], &s) != UAVMEC_STATUS_OK) return 10;
    UavmecPlan *p = NULL;
    if (uavmec_solve(s, UAVMEC_SCHEME_PROPOSED, &p) != UAVMEC_STATUS_OK) return 11;
    printf("%zu %.1f\n", uavmec_plan_n_slots(p), uavmec_plan_achieved_bits(p));
    uavmec_plan_free(p);
    uavmec_scenario_free(s);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&bin).arg(scenario_path("hover.toml").to_str().unwrap()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "5 10000000.0\n");
    std::fs::remove_dir_all(&dir).ok();
}
