use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use pointgap_ffi::*;

fn dot(j: f64, v: f64) -> *mut PgModel {
    let mut m = ptr::null_mut();
    let s = unsafe { pg_model_new_dot(1.0, 0.2, -0.1, 0.35, -0.25, j, v, &mut m) };
    assert_eq!(s, PgStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = pg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn one_body_invariants_of_the_dot() {
    let m = dot(0.0, 0.0);
    let mut w = PgWinding::default();
    let mut twice = 0i64;
    let s = unsafe { pg_one_body_winding(m, 0.0, 0.0, 256, &mut w, &mut twice) };
    assert_eq!(s, PgStatus::Ok);
    assert_eq!((w.value, twice), (0, 2));
    assert!(w.gap_margin > 0.0);
    unsafe { pg_model_free(m) };
}

#[test]
fn sector_dimension_and_eigenvalues() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pg_model_new_chain(7, 1.0, 0.0, 0.0, PgBoundary::Open, &mut m) }, PgStatus::Ok);
    let mut dim = 0usize;
    assert_eq!(unsafe { pg_sector_dim(m, 3, -1, &mut dim) }, PgStatus::Ok);
    assert_eq!(dim, 28);

    let mut len = 0usize;
    let mut re = vec![0.0; 4];
    let mut im = vec![0.0; 4];
    let s = unsafe { pg_eigenvalues(m, 3, -1, 0.0, re.as_mut_ptr(), im.as_mut_ptr(), re.len(), &mut len) };
    assert_eq!(s, PgStatus::BufferTooSmall);
    assert_eq!(len, 28);

    re.resize(len, 1.0);
    im.resize(len, 1.0);
    let s = unsafe { pg_eigenvalues(m, 3, -1, 0.0, re.as_mut_ptr(), im.as_mut_ptr(), re.len(), &mut len) };
    assert_eq!(s, PgStatus::Ok);
    // the open noninteracting chain is nilpotent in this sector
    assert!(re.iter().zip(&im).all(|(a, b)| a.hypot(*b) < 1e-8));
    unsafe { pg_model_free(m) };
}

#[test]
fn many_body_windings() {
    let m = dot(1.0, 1.0);
    let mut w = PgWinding::default();
    assert_eq!(unsafe { pg_many_body_winding(m, 2, 1, 0.0, 0.0, 128, &mut w) }, PgStatus::Ok);
    assert_eq!(w.value, 0);
    unsafe { pg_model_free(m) };

    let m = dot(0.0, 0.0);
    assert_eq!(unsafe { pg_many_body_winding(m, 1, -1, 0.0, 0.0, 128, &mut w) }, PgStatus::Ok);
    assert_eq!(w.value, 1);
    // the b-up level sits at 0.35i for every theta
    assert_eq!(unsafe { pg_many_body_winding(m, 1, -1, 0.0, 0.35, 128, &mut w) }, PgStatus::GapClosed);
    assert!(last_error().contains("spectrum"));
    unsafe { pg_model_free(m) };
}

#[test]
fn argument_errors() {
    let mut out = ptr::null_mut();
    let s = unsafe { pg_model_new_dot(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, &mut out) };
    assert_eq!(s, PgStatus::InvalidArgument);
    assert!(out.is_null());
    assert_eq!(unsafe { pg_model_new_chain(0, 1.0, 0.0, 0.0, PgBoundary::Twisted, &mut out) }, PgStatus::InvalidArgument);
    assert_eq!(unsafe { pg_model_new_chain(7, 1.0, 0.0, 0.0, PgBoundary::Twisted, ptr::null_mut()) }, PgStatus::NullPointer);

    let m = dot(0.0, 0.0);
    let mut dim = 0usize;
    assert_eq!(unsafe { pg_sector_dim(m, 2, 0, &mut dim) }, PgStatus::InvalidArgument);
    assert_eq!(unsafe { pg_sector_dim(ptr::null(), 2, 1, &mut dim) }, PgStatus::NullPointer);
    assert_eq!(unsafe { pg_sector_dim(m, 2, 1, ptr::null_mut()) }, PgStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut w = PgWinding::default();
    assert_eq!(unsafe { pg_many_body_winding(m, 2, 1, 0.0, 0.0, 2, &mut w) }, PgStatus::InvalidArgument);
    unsafe {
        pg_model_free(m);
        pg_model_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(pg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pointgap.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "pg_model_new_dot",
        "pg_model_new_chain",
        "pg_model_free",
        "pg_sector_dim",
        "pg_eigenvalues",
        "pg_many_body_winding",
        "pg_one_body_winding",
        "pg_last_error_message",
        "pg_version",
        "PG_STATUS_GAP_CLOSED",
        "typedef struct PgModel PgModel;",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).output() else {
        eprintln!("no C compiler; skipped syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
