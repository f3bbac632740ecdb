//! C interface to `h3rect`.
//!
//! Results are returned through opaque handles that the caller releases with
//! the matching `*_free` function. Every entry point returns an
//! [`H3Status`]; on failure a message is available from
//! [`h3rect_last_error`] on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use h3rect::analysis::study::{convergence_study, solve_level, ErrorReport, LevelSolution, StudyOptions};
use h3rect::analysis::verify::run_suite;
use h3rect::analysis::ManufacturedCase;
use h3rect::cli::parse_family;
use h3rect::error::Error;
use h3rect::solver::SolverKind;

/// Status codes. The numeric values are stable.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H3Status {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad family, case, level list or option value.
    InvalidArgument = 2,
    /// Factorization failure or non-converged iteration.
    Numerical = 3,
    /// A verification suite ran and at least one check failed.
    VerificationFailed = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// A buffer supplied by the caller is too small.
    BufferTooSmall = 6,
    /// Internal panic caught at the boundary.
    Internal = 7,
}

/// Linear solver selector for [`H3Options`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H3Solver {
    Direct = 0,
    Cg = 1,
}

/// Run options. Obtain defaults from [`h3rect_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct H3Options {
    pub stiffness_q: usize,
    pub load_q: usize,
    pub error_q: usize,
    pub corner_levels: usize,
    pub solver: H3Solver,
    pub tol: f64,
    pub max_iter: usize,
    /// Non-zero forces serial assembly.
    pub deterministic: i32,
}

/// Convergence study result.
pub struct H3Report(ErrorReport);

/// Single-level discrete solution.
pub struct H3Solution(LevelSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: H3Status, msg: impl Into<String>) -> H3Status {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> H3Status {
    let status = if e.is_numerical() { H3Status::Numerical } else { H3Status::InvalidArgument };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> H3Status) -> H3Status {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(H3Status::Internal, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, H3Status> {
    if p.is_null() {
        return Err(fail(H3Status::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(H3Status::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn study_options(opts: *const H3Options) -> StudyOptions {
    let o = if opts.is_null() { h3rect_options_default() } else { unsafe { *opts } };
    let mut s = StudyOptions::default();
    s.assembly.stiffness_q = o.stiffness_q;
    s.assembly.load_q = o.load_q;
    s.assembly.parallel = o.deterministic == 0;
    s.error_q = o.error_q;
    s.corner_levels = o.corner_levels;
    s.solver.kind = match o.solver {
        H3Solver::Direct => SolverKind::Direct,
        H3Solver::Cg => SolverKind::Cg,
    };
    s.solver.tol = o.tol;
    s.solver.max_iter = o.max_iter;
    s
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

#[no_mangle]
pub extern "C" fn h3rect_options_default() -> H3Options {
    let s = StudyOptions::default();
    H3Options {
        stiffness_q: s.assembly.stiffness_q,
        load_q: s.assembly.load_q,
        error_q: s.error_q,
        corner_levels: s.corner_levels,
        solver: H3Solver::Direct,
        tol: s.solver.tol,
        max_iter: s.solver.max_iter,
        deterministic: 0,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn h3rect_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn h3rect_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn h3rect_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs a convergence study over `levels[0..num_levels]`.
///
/// `family` is "adini" or "morley"; `case_name` is "smooth2d", "lshape2d" or
/// "smooth3d". `opts` may be null for defaults.
///
/// # Safety
/// Pointers must be valid; `levels` must hold `num_levels` entries.
#[no_mangle]
pub unsafe extern "C" fn h3rect_convergence(
    family: *const c_char,
    case_name: *const c_char,
    levels: *const usize,
    num_levels: usize,
    opts: *const H3Options,
    out: *mut *mut H3Report,
) -> H3Status {
    guard(|| {
        if out.is_null() || levels.is_null() {
            return fail(H3Status::NullPointer, "null output or level pointer");
        }
        *out = ptr::null_mut();
        let (family, case_name) = match (read_str(family, "family"), read_str(case_name, "case")) {
            (Ok(f), Ok(c)) => (f, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let levels = std::slice::from_raw_parts(levels, num_levels);
        let result = parse_family(family)
            .and_then(|f| ManufacturedCase::by_name(case_name).map(|c| (f, c)))
            .and_then(|(f, c)| convergence_study(&c, f, levels, &study_options(opts)));
        match result {
            Ok(r) => {
                *out = Box::into_raw(Box::new(H3Report(r)));
                H3Status::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn h3rect_report_free(report: *mut H3Report) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn h3rect_report_num_levels(report: *const H3Report) -> usize {
    report.as_ref().map_or(0, |r| r.0.levels.len())
}

/// Level `index`: mesh parameter `n`, size `h` and the four errors
/// (L2, H1, H2, H3) written to `errors[0..4]`.
///
/// # Safety
/// `report` must be a live handle and `n`, `h`, `errors` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn h3rect_report_level(
    report: *const H3Report,
    index: usize,
    n: *mut usize,
    h: *mut f64,
    errors: *mut f64,
) -> H3Status {
    guard(|| {
        let Some(r) = report.as_ref() else { return fail(H3Status::NullPointer, "null report") };
        if n.is_null() || h.is_null() || errors.is_null() {
            return fail(H3Status::NullPointer, "null output pointer");
        }
        let Some(lvl) = r.0.levels.get(index) else {
            return fail(H3Status::InvalidArgument, format!("level index {index} out of range"));
        };
        *n = lvl.n;
        *h = lvl.h;
        ptr::copy_nonoverlapping(lvl.errors.as_ptr(), errors, 4);
        H3Status::Ok
    })
}

/// Observed orders at the finest pair, written to `orders[0..4]`.
///
/// # Safety
/// `report` must be a live handle and `orders` valid for 4 writes.
#[no_mangle]
pub unsafe extern "C" fn h3rect_report_final_orders(report: *const H3Report, orders: *mut f64) -> H3Status {
    guard(|| {
        let Some(r) = report.as_ref() else { return fail(H3Status::NullPointer, "null report") };
        if orders.is_null() {
            return fail(H3Status::NullPointer, "null output pointer");
        }
        match r.0.final_orders() {
            Some(o) => {
                ptr::copy_nonoverlapping(o.as_ptr(), orders, 4);
                H3Status::Ok
            }
            None => fail(H3Status::InvalidArgument, "fewer than two levels"),
        }
    })
}

/// CSV table of the report; free with [`h3rect_string_free`]. Null if `report` is null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn h3rect_report_csv(report: *const H3Report) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| into_c_string(r.0.to_csv()))
}

/// Solves a single level.
///
/// # Safety
/// As for [`h3rect_convergence`].
#[no_mangle]
pub unsafe extern "C" fn h3rect_solve(
    family: *const c_char,
    case_name: *const c_char,
    n: usize,
    opts: *const H3Options,
    out: *mut *mut H3Solution,
) -> H3Status {
    guard(|| {
        if out.is_null() {
            return fail(H3Status::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let (family, case_name) = match (read_str(family, "family"), read_str(case_name, "case")) {
            (Ok(f), Ok(c)) => (f, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let result = parse_family(family)
            .and_then(|f| ManufacturedCase::by_name(case_name).map(|c| (f, c)))
            .and_then(|(f, c)| solve_level(&c, f, n, &study_options(opts)));
        match result {
            Ok(s) => {
                *out = Box::into_raw(Box::new(H3Solution(s)));
                H3Status::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn h3rect_solution_free(sol: *mut H3Solution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of global DoFs (the coefficient vector length).
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn h3rect_solution_num_dofs(sol: *const H3Solution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.coefficients.len())
}

/// Errors (L2, H1, H2, H3) written to `errors[0..4]`.
///
/// # Safety
/// `sol` must be a live handle and `errors` valid for 4 writes.
#[no_mangle]
pub unsafe extern "C" fn h3rect_solution_errors(sol: *const H3Solution, errors: *mut f64) -> H3Status {
    guard(|| {
        let Some(s) = sol.as_ref() else { return fail(H3Status::NullPointer, "null solution") };
        if errors.is_null() {
            return fail(H3Status::NullPointer, "null output pointer");
        }
        ptr::copy_nonoverlapping(s.0.result.errors.as_ptr(), errors, 4);
        H3Status::Ok
    })
}

/// Copies the coefficients into `buf[0..len]`.
///
/// # Safety
/// `sol` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn h3rect_solution_coefficients(sol: *const H3Solution, buf: *mut f64, len: usize) -> H3Status {
    guard(|| {
        let Some(s) = sol.as_ref() else { return fail(H3Status::NullPointer, "null solution") };
        if buf.is_null() {
            return fail(H3Status::NullPointer, "null buffer");
        }
        let c = &s.0.coefficients;
        if len < c.len() {
            return fail(H3Status::BufferTooSmall, format!("need {} entries, got {len}", c.len()));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), buf, c.len());
        H3Status::Ok
    })
}

/// Runs a verification suite over `dims[0..num_dims]`. On return
/// `*num_checks` and `*num_failed` hold the counts (either may be null).
///
/// # Safety
/// `suite` must be a valid C string and `dims` hold `num_dims` entries.
#[no_mangle]
pub unsafe extern "C" fn h3rect_verify(
    suite: *const c_char,
    dims: *const usize,
    num_dims: usize,
    num_checks: *mut usize,
    num_failed: *mut usize,
) -> H3Status {
    guard(|| {
        let suite = match read_str(suite, "suite") {
            Ok(s) => s,
            Err(s) => return s,
        };
        if dims.is_null() {
            return fail(H3Status::NullPointer, "null dims");
        }
        let dims = std::slice::from_raw_parts(dims, num_dims);
        if let Some(d) = dims.iter().find(|d| !(1..=4).contains(*d)) {
            return fail(H3Status::InvalidArgument, format!("dimension {d} outside 1..=4"));
        }
        match run_suite(suite, dims) {
            Ok(report) => {
                let failed: Vec<String> = report.failures().map(|f| format!("{}: {}", f.name, f.detail)).collect();
                if !num_checks.is_null() {
                    *num_checks = report.items.len();
                }
                if !num_failed.is_null() {
                    *num_failed = failed.len();
                }
                if failed.is_empty() {
                    H3Status::Ok
                } else {
                    fail(H3Status::VerificationFailed, failed.join("; "))
                }
            }
            Err(e) => from_error(e),
        }
    })
}
