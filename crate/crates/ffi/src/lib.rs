//! C ABI for the stepwave solver.
//!
//! Problems and solutions are opaque handles created and destroyed through
//! this API. Every fallible function returns an [`SwStatus`]; on failure the
//! thread-local message from [`sw_last_error_message`] describes the cause.
//! The header `include/stepwave.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stepwave::problem_io::{emit_csv, parse_document, serialize_document, ProblemDocument};
use stepwave::solver::{evaluate_grid, DivergenceNote, PiecewiseSolution, Severity};
use stepwave::{
    block_exp, build, check_divergence, evaluate, residual, spectral_pair, Error,
    OperatorCoefficients, SpectralPair,
};

/// Result codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Validation = 4,
    Overflow = 5,
    Domain = 6,
    Unavailable = 7,
    InvalidInput = 8,
    Unsupported = 9,
    Panic = 99,
}

/// A parsed problem document.
pub struct SwProblem {
    doc: ProblemDocument,
}

/// A built piecewise solution.
pub struct SwSolution {
    sol: PiecewiseSolution,
}

/// Flat copy of a divergence diagnostic.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwDivergenceNote {
    pub row: usize,
    pub strip: usize,
    pub k: usize,
    pub sigma: f64,
    pub max_exponent: f64,
    /// True for overflow, false for plain growth.
    pub overflow: bool,
}

impl From<&DivergenceNote> for SwDivergenceNote {
    fn from(n: &DivergenceNote) -> Self {
        SwDivergenceNote {
            row: n.cell.0,
            strip: n.cell.1,
            k: n.k,
            sigma: n.sigma,
            max_exponent: n.max_exponent,
            overflow: n.severity == Severity::Overflow,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(SwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Syntax { .. } => SwStatus::Syntax,
            Error::Validation(_) => SwStatus::Validation,
            Error::Overflow { .. } | Error::PowerOverflow { .. } | Error::ModeCap { .. } => {
                SwStatus::Overflow
            }
            Error::Domain(_) => SwStatus::Domain,
            Error::Unavailable(_) => SwStatus::Unavailable,
            Error::UnsupportedOrder(_) => SwStatus::Unsupported,
            Error::InvalidInput(_) | Error::Config(_) | Error::GridMismatch(_) => {
                SwStatus::InvalidInput
            }
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SwStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(SwStatus::InvalidInput, "string contains NUL".into()))
}

unsafe fn copy_notes(
    notes: &[DivergenceNote],
    out: *mut SwDivergenceNote,
    capacity: usize,
    count_out: *mut usize,
) -> Result<(), Failure> {
    write_out(count_out, notes.len(), "count_out")?;
    if capacity > 0 {
        if out.is_null() {
            return Err(null("notes_out"));
        }
        for (i, n) in notes.iter().take(capacity).enumerate() {
            out.add(i).write(n.into());
        }
    }
    Ok(())
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn sw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON problem document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a writable pointer.
/// The handle written to `*out` must be released with [`sw_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn sw_problem_from_json(json: *const c_char, out: *mut *mut SwProblem) -> SwStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(SwStatus::InvalidUtf8, e.to_string()))?;
        let doc = parse_document(text)?;
        write_out(out, Box::into_raw(Box::new(SwProblem { doc })), "out")
    })
}

/// # Safety
/// `problem` must be null or a handle from [`sw_problem_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_problem_free(problem: *mut SwProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Serializes a problem back to JSON. Free the string with [`sw_string_free`].
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_problem_to_json(problem: *const SwProblem, out: *mut *mut c_char) -> SwStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let s = into_c_string(serialize_document(&p.doc))?;
        write_out(out, s, "out")
    })
}

/// Truncation order K of the problem's initial condition.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_problem_truncation(problem: *const SwProblem, out: *mut usize) -> SwStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        write_out(out, p.doc.problem.truncation(), "out")
    })
}

/// Predicted growth/overflow notes for every cell and mode. Writes at most
/// `capacity` notes to `notes_out` and the total count to `*count_out`.
///
/// # Safety
/// `problem` must be a live handle; `notes_out` must hold `capacity` entries
/// (may be null when `capacity` is 0); `count_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_problem_check_divergence(
    problem: *const SwProblem,
    notes_out: *mut SwDivergenceNote,
    capacity: usize,
    count_out: *mut usize,
) -> SwStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        copy_notes(&check_divergence(&p.doc.problem), notes_out, capacity, count_out)
    })
}

/// Builds the piecewise solution. Release it with [`sw_solution_free`].
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_build(problem: *const SwProblem, out: *mut *mut SwSolution) -> SwStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let sol = build(&p.doc.problem)?;
        write_out(out, Box::into_raw(Box::new(SwSolution { sol })), "out")
    })
}

/// # Safety
/// `solution` must be null or a handle from [`sw_solution_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_free(solution: *mut SwSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// `Psi(t, x)`; fails with `SW_STATUS_UNAVAILABLE` inside overflowed cells.
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_evaluate(
    solution: *const SwSolution,
    t: f64,
    x: f64,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        write_out(out, evaluate(&s.sol, t, x)?, "out")
    })
}

/// Analytic and finite-difference PDE residuals at an interior point.
///
/// # Safety
/// `solution` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_residual(
    solution: *const SwSolution,
    t: f64,
    x: f64,
    dt: f64,
    analytic_out: *mut f64,
    fd_out: *mut f64,
) -> SwStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let (a, fd) = residual(&s.sol, t, x, dt)?;
        write_out(analytic_out, a, "analytic_out")?;
        write_out(fd_out, fd, "fd_out")
    })
}

/// Tolerance scale of the solution (see the Rust `PiecewiseSolution::scale`).
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_scale(solution: *const SwSolution, out: *mut f64) -> SwStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        write_out(out, s.sol.scale(), "out")
    })
}

/// Samples the uniform `nt x nx` grid over `[0, T[ x [-l, l[` into
/// `values_out` (row-major, `t` outer). Entries in overflowed cells are NaN.
/// `t_out` (length `nt`) and `x_out` (length `nx`) may be null.
///
/// # Safety
/// `values_out` must hold `nt * nx` doubles; non-null coordinate buffers
/// must hold `nt` and `nx` doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_grid(
    solution: *const SwSolution,
    nt: usize,
    nx: usize,
    values_out: *mut f64,
    t_out: *mut f64,
    x_out: *mut f64,
) -> SwStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        if values_out.is_null() {
            return Err(null("values_out"));
        }
        let field = evaluate_grid(&s.sol, nt, nx)?;
        for (i, v) in field.values.iter().enumerate() {
            values_out.add(i).write(v.unwrap_or(f64::NAN));
        }
        if !t_out.is_null() {
            ptr::copy_nonoverlapping(field.t_values.as_ptr(), t_out, nt);
        }
        if !x_out.is_null() {
            ptr::copy_nonoverlapping(field.x_values.as_ptr(), x_out, nx);
        }
        Ok(())
    })
}

/// CSV (`t,x,psi`, `NA` for absent values) of the uniform `nt x nx` grid.
/// Free the string with [`sw_string_free`].
///
/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_solution_csv(
    solution: *const SwSolution,
    nt: usize,
    nx: usize,
    out: *mut *mut c_char,
) -> SwStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let field = evaluate_grid(&s.sol, nt, nx)?;
        write_out(out, into_c_string(emit_csv(&field))?, "out")
    })
}

/// Divergence notes recorded while building. Same buffer protocol as
/// [`sw_problem_check_divergence`].
///
/// # Safety
/// As for [`sw_problem_check_divergence`].
#[no_mangle]
pub unsafe extern "C" fn sw_solution_notes(
    solution: *const SwSolution,
    notes_out: *mut SwDivergenceNote,
    capacity: usize,
    count_out: *mut usize,
) -> SwStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        copy_notes(s.sol.diagnostics(), notes_out, capacity, count_out)
    })
}

/// Spectral pair `(sigma_k, omega_k)` of the operator with coefficients
/// `a[0..len]` (`len` = order + 1, odd) on `[-l, l[`.
///
/// # Safety
/// `a` must point to `len` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sw_spectral_pair(
    a: *const f64,
    len: usize,
    l: f64,
    k: usize,
    sigma_out: *mut f64,
    omega_out: *mut f64,
) -> SwStatus {
    guard(|| {
        if a.is_null() {
            return Err(null("a"));
        }
        let coeffs = std::slice::from_raw_parts(a, len).to_vec();
        let ops = OperatorCoefficients::new(coeffs, l)?;
        let p = spectral_pair(&ops, k)?;
        write_out(sigma_out, p.sigma, "sigma_out")?;
        write_out(omega_out, p.omega, "omega_out")
    })
}

/// `e^{t [[sigma, omega], [-omega, sigma]]}` written row-major to `out[0..4]`.
///
/// # Safety
/// `out` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_block_exp(sigma: f64, omega: f64, t: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = block_exp(&SpectralPair { sigma, omega, k: 0 }, t)?;
        for (i, v) in [b.m11, b.m12, b.m21, b.m22].into_iter().enumerate() {
            out.add(i).write(v);
        }
        Ok(())
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
