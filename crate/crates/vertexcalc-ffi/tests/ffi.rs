use std::ffi::{c_char, CStr, CString};
use std::ptr;

use vertexcalc_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { vc_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(vc_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn bell() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { vc_bell(3, 2, &mut out) }, VcStatus::Ok);
    assert_eq!(take(out), "3*x1*x2");
    assert!(vc_last_error().is_null());
    assert_eq!(unsafe { vc_bell(2, 3, &mut out) }, VcStatus::OutOfRange);
    assert!(last_error().contains("1 <= k <= n"));
    assert_eq!(unsafe { vc_bell(1, 1, ptr::null_mut()) }, VcStatus::NullPointer);
}

#[test]
fn decompose_delta() {
    // -2w delta(z + w): coefficient -2 (-1)^{n+1} at z^n w^{-n}
    let terms: Vec<String> =
        (-6..=3i64).map(|n| format!("[{n}, {}, \"{}\"]", -n, if (n + 1) % 2 == 0 { -2 } else { 2 })).collect();
    let json = CString::new(format!(r#"{{"N": 2, "zwindow": [-6, 3], "wwindow": [-3, 6], "terms": [{}]}}"#, terms.join(","))).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { vc_dist_from_json(json.as_ptr(), &mut d) }, VcStatus::Ok);
    assert_eq!(unsafe { vc_dist_term_count(d) }, 10);
    let mut s = ptr::null_mut();
    let orders = [0u32, 1];
    assert_eq!(unsafe { vc_decompose(d, 0, orders.as_ptr(), 2, &mut s) }, VcStatus::Ok);
    assert_eq!(unsafe { vc_delta_sum_term_count(s) }, 1);
    assert_eq!(take(unsafe { vc_delta_sum_coeff(s, 2, 0) }), "-2w");
    assert!(unsafe { vc_delta_sum_coeff(s, 1, 0) }.is_null());
    let j: serde_json::Value = serde_json::from_str(&take(unsafe { vc_delta_sum_to_json(s) })).unwrap();
    assert_eq!(j["terms"][0]["k"], 2);
    unsafe { vc_delta_sum_free(s) };

    // orders (0, 0) cannot absorb the delta
    let mut s2 = ptr::null_mut();
    let zero = [0u32, 0];
    assert_eq!(unsafe { vc_decompose(d, 0, zero.as_ptr(), 2, &mut s2) }, VcStatus::NotLocal);
    assert!(s2.is_null());
    assert_eq!(unsafe { vc_decompose(d, 0, zero.as_ptr(), 1, &mut s2) }, VcStatus::OutOfRange);
    unsafe { vc_dist_free(d) };

    let bad = CString::new("{bad").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { vc_dist_from_json(bad.as_ptr(), &mut d) }, VcStatus::Parse);
    assert!(last_error().starts_with("invalid JSON"));
    assert_eq!(unsafe { vc_dist_from_json(ptr::null(), &mut d) }, VcStatus::NullPointer);
}

#[test]
fn ope() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { vc_session_new(2, &mut s) }, VcStatus::Ok);
    let (a, b) = (CString::new("hC").unwrap(), CString::new("hC").unwrap());
    let mut o = ptr::null_mut();
    assert_eq!(unsafe { vc_ope(s, a.as_ptr(), b.as_ptr(), ptr::null(), 0, &mut o) }, VcStatus::Ok);
    assert_eq!(unsafe { vc_ope_entry_count(o) }, 2);
    assert_eq!(take(unsafe { vc_ope_render(o, 1, 1) }), "-1/4");
    assert_eq!(take(unsafe { vc_ope_render(o, 2, 1) }), "-1/4");
    assert!(unsafe { vc_ope_render(o, 1, 2) }.is_null());
    unsafe { vc_ope_free(o) };

    let pb = CString::new("phiB").unwrap();
    let orders = [0u32, 0];
    assert_eq!(unsafe { vc_ope(s, pb.as_ptr(), pb.as_ptr(), orders.as_ptr(), 2, &mut o) }, VcStatus::NotLocal);
    let unknown = CString::new("nosuch").unwrap();
    assert_eq!(unsafe { vc_ope(s, unknown.as_ptr(), pb.as_ptr(), ptr::null(), 0, &mut o) }, VcStatus::Parse);
    assert_eq!(unsafe { vc_session_set_cutoff(s, 1, 0) }, VcStatus::OutOfRange);
    assert_eq!(unsafe { vc_session_set_cutoff(s, 2, 1) }, VcStatus::Ok);
    unsafe { vc_session_free(s) };
    assert_eq!(unsafe { vc_session_new(0, &mut s) }, VcStatus::OutOfRange);
}

#[test]
fn verify() {
    let name = CString::new("heisenberg-d").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { vc_verify(name.as_ptr(), &mut r) }, VcStatus::Ok);
    assert!(unsafe { vc_report_check_count(r) } > 0);
    assert_eq!(unsafe { vc_report_failed_count(r) }, 0);
    let j: serde_json::Value = serde_json::from_str(&take(unsafe { vc_report_to_json(r) })).unwrap();
    assert_eq!(j["suite"], "heisenberg-d");
    unsafe { vc_report_free(r) };

    let li = CString::new("li-appendix").unwrap();
    assert_eq!(unsafe { vc_verify(li.as_ptr(), &mut r) }, VcStatus::Ok);
    assert_eq!(unsafe { vc_report_failed_count(r) }, 1);
    unsafe { vc_report_free(r) };

    let unknown = CString::new("unknown-suite").unwrap();
    assert_eq!(unsafe { vc_verify(unknown.as_ptr(), &mut r) }, VcStatus::UnknownSuite);
    let bad_utf8 = [0xffu8, 0];
    assert_eq!(unsafe { vc_verify(bad_utf8.as_ptr().cast(), &mut r) }, VcStatus::InvalidUtf8);
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        vc_dist_free(ptr::null_mut());
        vc_delta_sum_free(ptr::null_mut());
        vc_session_free(ptr::null_mut());
        vc_ope_free(ptr::null_mut());
        vc_report_free(ptr::null_mut());
        vc_string_free(ptr::null_mut());
        assert_eq!(vc_report_check_count(ptr::null()), 0);
        assert!(vc_ope_to_json(ptr::null()).is_null());
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/vertexcalc.h")).unwrap();
    for f in ["vc_decompose", "vc_ope_render", "vc_verify", "vc_last_error", "VC_STATUS_NOT_LOCAL"] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", &format!("{dir}/include"), &format!("{dir}/examples/ope.c")])
        .status()
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(status.success());
}
