//! C interface to `ivopt`.
//!
//! Problems live behind the opaque [`IvoProblem`] handle. Every function
//! returns an [`IvoStatus`]; on failure the message is available from
//! [`ivo_last_error_message`] on the same thread. Sample sets are passed as
//! row-major `count x n` arrays, or as `NULL` to use the set declared in the
//! problem text.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ivopt::certify::{certify_on_set, SolutionKind};
use ivopt::existence::{descend_to_elu, ekeland_quasi, DescentTrace};
use ivopt::kkt::quasi_kkt_residual;
use ivopt::problem::{Epsilon, Problem, ProblemFile, SampleSet};
use ivopt::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvoStatus {
    /// Success; for checks, the point passed.
    Ok = 0,
    /// The check ran and the point was refuted or not certified.
    Refuted = 1,
    NullArgument = 2,
    InvalidArgument = 3,
    ParseError = 4,
    Infeasible = 5,
    PreconditionFailed = 6,
    NotConvex = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

/// Solution concepts, in the order of the CLI's `--kind` values.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvoKind {
    Lu = 0,
    WeakLu = 1,
    Elu = 2,
    WeakElu = 3,
    EQuasiLu = 4,
    WeakEQuasiLu = 5,
}

fn kind_of(k: i32) -> Result<SolutionKind, Error> {
    usize::try_from(k)
        .ok()
        .and_then(|i| SolutionKind::ALL.get(i).copied())
        .ok_or_else(|| Error::InvalidArgument(format!("unknown solution kind {k}")))
}

/// Opaque problem handle.
pub struct IvoProblem {
    problem: Problem,
    samples: Option<SampleSet>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IvoStatus {
    match e {
        Error::InvalidArgument(m) if m == NULL_MSG => IvoStatus::NullArgument,
        Error::Parse { .. } | Error::Format { .. } => IvoStatus::ParseError,
        Error::Infeasible { .. } | Error::NoFeasiblePointFound => IvoStatus::Infeasible,
        Error::NotConvex(_) | Error::StrictConvexityNotCertified => IvoStatus::NotConvex,
        Error::Precondition(_)
        | Error::EpsilonHypothesis(_)
        | Error::CcNotAsserted
        | Error::NonSmoothAtPoint(_)
        | Error::UnsupportedAtomForMembership(_)
        | Error::EmptySample => IvoStatus::PreconditionFailed,
        _ => IvoStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<IvoStatus, Error>) -> IvoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Err(_) => {
            set_error("internal error: panic in ivopt".into());
            IvoStatus::Internal
        }
    }
}

const NULL_MSG: &str = "null pointer";

struct Null;

impl From<Null> for Error {
    fn from(_: Null) -> Self {
        Error::InvalidArgument(NULL_MSG.into())
    }
}

unsafe fn handle<'a>(p: *const IvoProblem) -> Result<&'a IvoProblem, Error> {
    p.as_ref().ok_or_else(|| Null.into())
}

unsafe fn slice<'a>(x: *const f64, len: usize) -> Result<&'a [f64], Error> {
    if len == 0 {
        return Ok(&[]);
    }
    if x.is_null() {
        return Err(Null.into());
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn samples(h: &IvoProblem, points: *const f64, count: usize) -> Result<SampleSet, Error> {
    let n = h.problem.dim();
    if points.is_null() {
        return h
            .samples
            .clone()
            .ok_or_else(|| Error::InvalidArgument("no sample array given and the problem declares none".into()));
    }
    let flat = slice(points, count.checked_mul(n).ok_or_else(|| Error::InvalidArgument("sample size overflows".into()))?)?;
    SampleSet::explicit(flat.chunks(n).map(<[f64]>::to_vec).collect(), n)
}

fn point(h: &IvoProblem, x: &[f64]) -> Result<(), Error> {
    if x.len() != h.problem.dim() {
        return Err(Error::DimensionMismatch { expected: h.problem.dim(), got: x.len() });
    }
    Ok(())
}

/// Parses problem-file text into a new handle stored at `*out`.
/// Relative `file(...)` sample paths resolve against the working directory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ivo_problem_from_str(text: *const c_char, out: *mut *mut IvoProblem) -> IvoStatus {
    if text.is_null() || out.is_null() {
        set_error(NULL_MSG.into());
        return IvoStatus::NullArgument;
    }
    *out = ptr::null_mut();
    guard(|| {
        let s = CStr::from_ptr(text).to_str().map_err(|_| Error::InvalidArgument("text is not UTF-8".into()))?;
        let f = ProblemFile::parse(s, Path::new("."))?;
        *out = Box::into_raw(Box::new(IvoProblem { problem: f.problem, samples: f.samples }));
        Ok(IvoStatus::Ok)
    })
}

/// Releases a handle; `NULL` is ignored.
///
/// # Safety
/// `p` must come from [`ivo_problem_from_str`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ivo_problem_free(p: *mut IvoProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension `n`, or 0 for `NULL`.
///
/// # Safety
/// `p` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ivo_problem_dim(p: *const IvoProblem) -> usize {
    p.as_ref().map_or(0, |h| h.problem.dim())
}

/// Writes `[fL(x), fU(x)]` to `lo` and `hi`.
///
/// # Safety
/// `x` must hold `n` values; `lo` and `hi` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivo_interval_value(p: *const IvoProblem, x: *const f64, n: usize, lo: *mut f64, hi: *mut f64) -> IvoStatus {
    if lo.is_null() || hi.is_null() {
        set_error(NULL_MSG.into());
        return IvoStatus::NullArgument;
    }
    guard(|| {
        let h = handle(p)?;
        let x = slice(x, n)?;
        point(h, x)?;
        let v = h.problem.interval_value(x)?;
        *lo = v.lo();
        *hi = v.hi();
        Ok(IvoStatus::Ok)
    })
}

/// Certifies `x*` against `kind` (an [`IvoKind`] value) on the sample set. Returns `Ok` on a pass
/// and `Refuted` otherwise, with the refuter's position in `*refuter`
/// (`-1` on a pass). `refuter` may be `NULL`.
///
/// # Safety
/// Arrays must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn ivo_certify(
    p: *const IvoProblem,
    kind: i32,
    x_star: *const f64,
    n: usize,
    eps_lo: f64,
    eps_hi: f64,
    points: *const f64,
    count: usize,
    refuter: *mut i64,
) -> IvoStatus {
    guard(|| {
        let h = handle(p)?;
        let x = slice(x_star, n)?;
        point(h, x)?;
        let s = samples(h, points, count)?;
        let c = certify_on_set(kind_of(kind)?, &h.problem, x, Epsilon::new(eps_lo, eps_hi)?, &s)?;
        if let Some(r) = refuter.as_mut() {
            *r = c.refuter_index().map_or(-1, |i| i as i64);
        }
        Ok(if c.passed() { IvoStatus::Ok } else { IvoStatus::Refuted })
    })
}

unsafe fn run_trace(
    p: *const IvoProblem,
    x0: *const f64,
    n: usize,
    eps_lo: f64,
    eps_hi: f64,
    points: *const f64,
    count: usize,
    out_x: *mut f64,
    moves: *mut usize,
    f: impl FnOnce(&Problem, &SampleSet, &[f64], Epsilon) -> Result<(Vec<f64>, DescentTrace), Error>,
) -> IvoStatus {
    guard(|| {
        let h = handle(p)?;
        let x0 = slice(x0, n)?;
        point(h, x0)?;
        if out_x.is_null() {
            return Err(Null.into());
        }
        let s = samples(h, points, count)?;
        let (x, trace) = f(&h.problem, &s, x0, Epsilon::new(eps_lo, eps_hi)?)?;
        std::slice::from_raw_parts_mut(out_x, n).copy_from_slice(&x);
        if let Some(m) = moves.as_mut() {
            *m = trace.len();
        }
        Ok(if trace.full.passed() { IvoStatus::Ok } else { IvoStatus::Refuted })
    })
}

/// Descends from `x0` to an E-LU solution of the sample set; the result is
/// written to `out_x` (length `n`) and the move count to `*moves`.
///
/// # Safety
/// Arrays must hold the stated number of values; `moves` may be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn ivo_descend(
    p: *const IvoProblem,
    x0: *const f64,
    n: usize,
    eps_lo: f64,
    eps_hi: f64,
    points: *const f64,
    count: usize,
    out_x: *mut f64,
    moves: *mut usize,
) -> IvoStatus {
    run_trace(p, x0, n, eps_lo, eps_hi, points, count, out_x, moves, descend_to_elu)
}

/// Ekeland-type construction of an E-quasi-LU solution; same layout as
/// [`ivo_descend`].
///
/// # Safety
/// Arrays must hold the stated number of values; `moves` may be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn ivo_ekeland(
    p: *const IvoProblem,
    x0: *const f64,
    n: usize,
    eps_lo: f64,
    eps_hi: f64,
    points: *const f64,
    count: usize,
    out_x: *mut f64,
    moves: *mut usize,
) -> IvoStatus {
    run_trace(p, x0, n, eps_lo, eps_hi, points, count, out_x, moves, |p, s, x0, e| ekeland_quasi(p, s, e, x0))
}

/// Minimized quasi-KKT margin at `x`; `Ok` when it is within tolerance,
/// `Refuted` otherwise.
///
/// # Safety
/// `x` must hold `n` values and `margin` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivo_quasi_kkt_residual(
    p: *const IvoProblem,
    x: *const f64,
    n: usize,
    eps_lo: f64,
    eps_hi: f64,
    margin: *mut f64,
) -> IvoStatus {
    guard(|| {
        let h = handle(p)?;
        let x = slice(x, n)?;
        point(h, x)?;
        let m = margin.as_mut().ok_or(Null)?;
        let q = quasi_kkt_residual(&h.problem, x, Epsilon::new(eps_lo, eps_hi)?)?;
        *m = q.margin;
        Ok(if q.holds { IvoStatus::Ok } else { IvoStatus::Refuted })
    })
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ivo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
