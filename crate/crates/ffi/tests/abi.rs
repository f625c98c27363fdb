use std::ffi::{CStr, CString};
use std::ptr;

use ivopt_ffi::*;

const QUAD: &str = "[problem]\nn = 1\n[objective]\nlower = \"x1^2\"\nupper = \"2*x1^2\"\n[constraints]\ng1 = \"1 - x1\"\n[samples]\ngrid(-3..3, 60)\n";

fn load(text: &str) -> *mut IvoProblem {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ivo_problem_from_str(c.as_ptr(), &mut p) }, IvoStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ivo_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn handle_lifecycle_and_values() {
    let p = load(QUAD);
    unsafe {
        assert_eq!(ivo_problem_dim(p), 1);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(ivo_interval_value(p, [1.5].as_ptr(), 1, &mut lo, &mut hi), IvoStatus::Ok);
        assert_eq!((lo, hi), (2.25, 4.5));
        assert_eq!(ivo_interval_value(p, [1.0, 2.0].as_ptr(), 2, &mut lo, &mut hi), IvoStatus::InvalidArgument);
        assert!(last_error().contains("dimension mismatch"));
        ivo_problem_free(p);
        ivo_problem_free(ptr::null_mut());
        assert_eq!(ivo_problem_dim(ptr::null()), 0);
    }
}

#[test]
fn parse_errors_carry_positions() {
    let bad = CString::new(QUAD.replace("2*x1^2", "2*x1^^2")).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ivo_problem_from_str(bad.as_ptr(), &mut p) }, IvoStatus::ParseError);
    assert!(p.is_null());
    assert!(last_error().starts_with("parse error at line 5"), "{}", last_error());
    assert_eq!(unsafe { ivo_problem_from_str(ptr::null(), &mut p) }, IvoStatus::NullArgument);
}

#[test]
fn certify_with_declared_and_explicit_samples() {
    let p = load(QUAD);
    let mut r = 0i64;
    unsafe {
        assert_eq!(ivo_certify(p, IvoKind::Lu as i32, [1.0].as_ptr(), 1, 0.0, 0.0, ptr::null(), 0, &mut r), IvoStatus::Ok);
        assert_eq!(r, -1);
        assert_eq!(ivo_certify(p, IvoKind::WeakLu as i32, [2.0].as_ptr(), 1, 0.0, 0.0, ptr::null(), 0, &mut r), IvoStatus::Refuted);
        assert_eq!(r, 40);
        let pts = [3.0, 1.5, 1.0];
        assert_eq!(ivo_certify(p, IvoKind::Lu as i32, [2.0].as_ptr(), 1, 0.0, 0.0, pts.as_ptr(), 3, &mut r), IvoStatus::Refuted);
        assert_eq!(r, 1);
        assert_eq!(ivo_certify(p, 9, [1.0].as_ptr(), 1, 0.0, 0.0, ptr::null(), 0, &mut r), IvoStatus::InvalidArgument);
        assert_eq!(ivo_certify(p, 0, [0.0].as_ptr(), 1, 0.0, 0.0, ptr::null(), 0, &mut r), IvoStatus::Infeasible);
        assert_eq!(ivo_certify(p, 2, [1.0].as_ptr(), 1, 0.5, 0.1, ptr::null(), 0, &mut r), IvoStatus::InvalidArgument);
        ivo_problem_free(p);
    }
}

#[test]
fn descend_ekeland_and_quasi_kkt() {
    let p = load("[problem]\nn = 1\n[objective]\nlower = \"x1^2\"\nupper = \"2*x1^2\"\n[samples]\ngrid(-2..2, 40)\n");
    let mut x = [0.0];
    let mut moves = 0usize;
    unsafe {
        assert_eq!(ivo_descend(p, [2.0].as_ptr(), 1, 0.5, 1.0, ptr::null(), 0, x.as_mut_ptr(), &mut moves), IvoStatus::Ok);
        assert!((1..=4).contains(&moves));
        assert!(x[0].abs() < 2.0);
        assert_eq!(
            ivo_descend(p, [2.0].as_ptr(), 1, 0.0, 0.0, ptr::null(), 0, x.as_mut_ptr(), ptr::null_mut()),
            IvoStatus::PreconditionFailed
        );
        assert_eq!(ivo_ekeland(p, [2.0].as_ptr(), 1, 0.5, 0.5, ptr::null(), 0, x.as_mut_ptr(), &mut moves), IvoStatus::Ok);
        let mut margin = 0.0;
        assert_eq!(ivo_quasi_kkt_residual(p, [0.0].as_ptr(), 1, 0.1, 0.1, &mut margin), IvoStatus::Ok);
        assert!(margin <= 0.0);
        assert_eq!(ivo_quasi_kkt_residual(p, [1.0].as_ptr(), 1, 0.1, 0.1, &mut margin), IvoStatus::Refuted);
        assert_eq!(ivo_quasi_kkt_residual(p, [1.0].as_ptr(), 1, 0.1, 0.1, ptr::null_mut()), IvoStatus::NullArgument);
        ivo_problem_free(p);
    }
}

/// Builds a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let crate_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    let lib = deps.parent().unwrap().join("libivopt_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "ivopt.h"
int main(void) {
    const char *text = "[problem]\nn = 1\n[objective]\nlower = \"x1^2\"\nupper = \"2*x1^2\"\n[samples]\ngrid(-1..1, 4)\n";
    IvoProblem *p = NULL;
    if (ivo_problem_from_str(text, &p) != IVO_STATUS_OK) return 10;
    double x = 0.0, lo, hi;
    if (ivo_interval_value(p, &x, 1, &lo, &hi) != IVO_STATUS_OK || lo != 0.0 || hi != 0.0) return 11;
    int64_t r = 7;
    if (ivo_certify(p, IVO_KIND_LU, &x, 1, 0.0, 0.0, NULL, 0, &r) != IVO_STATUS_OK || r != -1) return 12;
    double y = 1.0;
    if (ivo_certify(p, IVO_KIND_WEAK_LU, &y, 1, 0.0, 0.0, NULL, 0, &r) != IVO_STATUS_REFUTED || r != 1) return 13;
    ivo_problem_free(p);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
