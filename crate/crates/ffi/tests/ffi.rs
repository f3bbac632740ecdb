use std::ffi::{CStr, CString};
use std::ptr;

use h3rect_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = h3rect_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn convergence_round_trip() {
    let levels = [4usize, 8];
    let mut report = ptr::null_mut();
    let st = unsafe { h3rect_convergence(c("adini").as_ptr(), c("smooth2d").as_ptr(), levels.as_ptr(), 2, ptr::null(), &mut report) };
    assert_eq!(st, H3Status::Ok);
    unsafe {
        assert_eq!(h3rect_report_num_levels(report), 2);
        let (mut n, mut h, mut e) = (0usize, 0.0, [0.0; 4]);
        assert_eq!(h3rect_report_level(report, 1, &mut n, &mut h, e.as_mut_ptr()), H3Status::Ok);
        assert_eq!(n, 8);
        assert!((e[3] - 69.71).abs() / 69.71 < 0.1);
        assert_eq!(h3rect_report_level(report, 2, &mut n, &mut h, e.as_mut_ptr()), H3Status::InvalidArgument);
        let mut o = [0.0; 4];
        assert_eq!(h3rect_report_final_orders(report, o.as_mut_ptr()), H3Status::Ok);
        assert!(o[3] > 0.9 && o[3] < 1.2);
        let csv = h3rect_report_csv(report);
        assert!(CStr::from_ptr(csv).to_str().unwrap().starts_with("N,h,e0"));
        h3rect_string_free(csv);
        h3rect_report_free(report);
    }
}

#[test]
fn solve_and_copy_coefficients() {
    let mut opts = h3rect_options_default();
    opts.deterministic = 1;
    opts.solver = H3Solver::Cg;
    let mut sol = ptr::null_mut();
    let st = unsafe { h3rect_solve(c("morley").as_ptr(), c("smooth2d").as_ptr(), 4, &opts, &mut sol) };
    assert_eq!(st, H3Status::Ok);
    unsafe {
        let n = h3rect_solution_num_dofs(sol);
        assert!(n > 0);
        let mut buf = vec![0.0; n];
        assert_eq!(h3rect_solution_coefficients(sol, buf.as_mut_ptr(), n - 1), H3Status::BufferTooSmall);
        assert_eq!(h3rect_solution_coefficients(sol, buf.as_mut_ptr(), n), H3Status::Ok);
        assert!(buf.iter().any(|&v| v != 0.0));
        let mut e = [0.0; 4];
        assert_eq!(h3rect_solution_errors(sol, e.as_mut_ptr()), H3Status::Ok);
        assert!(e.iter().all(|v| v.is_finite() && *v > 0.0));
        h3rect_solution_free(sol);
    }
}

#[test]
fn error_codes() {
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(h3rect_solve(c("hermite").as_ptr(), c("smooth2d").as_ptr(), 4, ptr::null(), &mut sol), H3Status::InvalidArgument);
        assert!(last_error().contains("hermite"));
        assert!(sol.is_null());
        assert_eq!(h3rect_solve(ptr::null(), c("smooth2d").as_ptr(), 4, ptr::null(), &mut sol), H3Status::NullPointer);
        assert_eq!(h3rect_solve(c("adini").as_ptr(), c("smooth2d").as_ptr(), 0, ptr::null(), &mut sol), H3Status::InvalidArgument);
        let bad = [0xffu8, 0];
        assert_eq!(h3rect_solve(bad.as_ptr().cast(), c("smooth2d").as_ptr(), 4, ptr::null(), &mut sol), H3Status::InvalidUtf8);

        let mut opts = h3rect_options_default();
        opts.solver = H3Solver::Cg;
        opts.max_iter = 2;
        assert_eq!(h3rect_solve(c("adini").as_ptr(), c("smooth2d").as_ptr(), 8, &opts, &mut sol), H3Status::Numerical);

        let levels = [4usize, 6];
        let mut report = ptr::null_mut();
        let st = h3rect_convergence(c("adini").as_ptr(), c("smooth2d").as_ptr(), levels.as_ptr(), 2, ptr::null(), &mut report);
        assert_eq!(st, H3Status::InvalidArgument);
        assert!(report.is_null());

        h3rect_report_free(ptr::null_mut());
        h3rect_solution_free(ptr::null_mut());
        h3rect_string_free(ptr::null_mut());
        assert_eq!(h3rect_report_num_levels(ptr::null()), 0);
    }
}

#[test]
fn verify_counts() {
    let dims = [2usize];
    let (mut checks, mut failed) = (0usize, 99usize);
    let st = unsafe { h3rect_verify(c("unisolvence").as_ptr(), dims.as_ptr(), 1, &mut checks, &mut failed) };
    assert_eq!(st, H3Status::Ok);
    assert!(checks > 0);
    assert_eq!(failed, 0);
    let st = unsafe { h3rect_verify(c("bogus").as_ptr(), dims.as_ptr(), 1, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, H3Status::InvalidArgument);
    let dims = [5usize];
    let st = unsafe { h3rect_verify(c("all").as_ptr(), dims.as_ptr(), 1, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, H3Status::InvalidArgument);
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(h3rect_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/h3rect.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["h3rect_convergence", "h3rect_solve", "h3rect_verify", "h3rect_last_error", "H3_STATUS_NUMERICAL"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(&src, "#include \"h3rect.h\"\nint main(void) { H3Options o = h3rect_options_default(); return (int)o.error_q; }\n").unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("h3rect-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
