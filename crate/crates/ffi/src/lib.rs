//! C ABI for the corrsense toolkit.
//!
//! Conventions: every fallible call returns a [`CorrsenseStatus`]; outputs
//! come back through pointers. Instances and solver results are opaque
//! handles owned by this library and released with the matching `_free`
//! call. Strings returned by the library are NUL-terminated, heap-allocated,
//! and released with [`corrsense_string_free`]. A per-thread message with
//! details of the last failure is available via [`corrsense_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use corrsense::cert::{build_certificate, CertifyOptions};
use corrsense::instance::{
    instance_from_json, instance_to_json, make_instance, InstanceParams, ProblemInstance,
};
use corrsense::solver::{solve, Exactness, RecoveryResult, SolverOptions};
use corrsense::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrsenseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPrime = 3,
    NotPerfectSquare = 4,
    Infeasible = 5,
    NumericalFailure = 6,
    SizeTooLarge = 7,
    IoFailure = 8,
    BufferTooSmall = 9,
    InternalPanic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn status_of(err: &Error) -> CorrsenseStatus {
    match err {
        Error::NotPrime(_) => CorrsenseStatus::NotPrime,
        Error::NotPerfectSquare(_) => CorrsenseStatus::NotPerfectSquare,
        Error::ZeroVector
        | Error::DimensionMismatch { .. }
        | Error::CardinalityTooLarge { .. }
        | Error::InvalidIndexSet(_)
        | Error::Config(_) => CorrsenseStatus::InvalidArgument,
        Error::InfeasibleSizes(_)
        | Error::InfeasiblePlan(_)
        | Error::KeepNotSubset
        | Error::Infeasible(_) => CorrsenseStatus::Infeasible,
        Error::SingularGram { .. } | Error::SolverStall { .. } => CorrsenseStatus::NumericalFailure,
        Error::SizeTooLarge { .. } => CorrsenseStatus::SizeTooLarge,
        Error::Io { .. } | Error::Csv { .. } | Error::EmptyEnsemble => CorrsenseStatus::IoFailure,
    }
}

fn capture(err: Error) -> CorrsenseStatus {
    set_last_error(&err.to_string());
    status_of(&err)
}

fn guarded<F: FnOnce() -> CorrsenseStatus>(f: F) -> CorrsenseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            CorrsenseStatus::InternalPanic
        }
    }
}

/// Opaque problem-instance handle.
pub struct CorrsenseInstance {
    inner: ProblemInstance,
}

/// Opaque solver-result handle.
pub struct CorrsenseResult {
    inner: RecoveryResult,
    exactness: Option<Exactness>,
    n: usize,
    m: usize,
}

/// Library version as a static NUL-terminated string (do not free).
#[no_mangle]
pub extern "C" fn corrsense_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Detail message for the most recent failure on this thread, or NULL.
/// Free with [`corrsense_string_free`].
#[no_mangle]
pub extern "C" fn corrsense_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(message) => message.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a corrsense function that
/// allocates a string, not yet freed; NULL is accepted.
#[no_mangle]
pub unsafe extern "C" fn corrsense_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a seeded random instance: length `n`, `m` measurement rows,
/// `k` signal spikes, a `gamma_c` fraction of corrupted measurements.
/// On success stores a new handle in `out`.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn corrsense_instance_new(
    n: usize,
    m: usize,
    k: usize,
    gamma_c: f64,
    seed: u64,
    theory_mode: bool,
    out: *mut *mut CorrsenseInstance,
) -> CorrsenseStatus {
    if out.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    guarded(|| {
        let mut params = InstanceParams::new(n, m, k, gamma_c);
        params.theory_mode = theory_mode;
        match make_instance(&params, seed) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CorrsenseInstance { inner }));
                CorrsenseStatus::Ok
            }
            Err(e) => capture(e),
        }
    })
}

/// Parses an instance from its JSON replay form.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn corrsense_instance_from_json(
    json: *const c_char,
    out: *mut *mut CorrsenseInstance,
) -> CorrsenseStatus {
    if json.is_null() || out.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    guarded(|| {
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_last_error("instance JSON is not valid UTF-8");
                return CorrsenseStatus::InvalidArgument;
            }
        };
        match instance_from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CorrsenseInstance { inner }));
                CorrsenseStatus::Ok
            }
            Err(e) => capture(e),
        }
    })
}

/// Serializes the instance to its JSON replay form.
/// Free the string with [`corrsense_string_free`].
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn corrsense_instance_to_json(
    instance: *const CorrsenseInstance,
    out: *mut *mut c_char,
) -> CorrsenseStatus {
    if instance.is_null() || out.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    guarded(|| {
        let text = instance_to_json(&(*instance).inner);
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                CorrsenseStatus::Ok
            }
            Err(_) => {
                set_last_error("serialized instance contained an interior NUL");
                CorrsenseStatus::InternalPanic
            }
        }
    })
}

/// Number of measurement rows of the instance (0 on NULL).
///
/// # Safety
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn corrsense_instance_m(instance: *const CorrsenseInstance) -> usize {
    if instance.is_null() {
        0
    } else {
        (*instance).inner.m()
    }
}

/// Signal length of the instance (0 on NULL).
///
/// # Safety
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn corrsense_instance_n(instance: *const CorrsenseInstance) -> usize {
    if instance.is_null() {
        0
    } else {
        (*instance).inner.n
    }
}

/// Releases an instance handle (NULL accepted).
///
/// # Safety
/// `instance` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn corrsense_instance_free(instance: *mut CorrsenseInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Runs the weighted l1 solver (`min ||x||_1 + lambda ||f||_1` subject to
/// data consistency) on the instance's measurements and judges the output
/// against the instance's ground truth. `max_iter = 0` means the default.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn corrsense_solve(
    instance: *const CorrsenseInstance,
    lambda: f64,
    max_iter: usize,
    out: *mut *mut CorrsenseResult,
) -> CorrsenseStatus {
    if instance.is_null() || out.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    guarded(|| {
        let inst = &(*instance).inner;
        let mut opts = SolverOptions::new(lambda);
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        match solve(&inst.operator, &inst.b, &opts) {
            Ok(mut result) => {
                let exactness = result.judge(&inst.x0, &inst.f0);
                *out = Box::into_raw(Box::new(CorrsenseResult {
                    n: inst.n,
                    m: inst.m(),
                    exactness: Some(exactness),
                    inner: result,
                }));
                CorrsenseStatus::Ok
            }
            Err(e) => capture(e),
        }
    })
}

/// Scalar facts about a solver result, readable in one call.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CorrsenseSolveStats {
    pub objective: f64,
    pub constraint_residual: f64,
    pub rel_err_x: f64,
    pub rel_err_f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub exact: bool,
}

/// Copies the result's scalar diagnostics into `stats`.
///
/// # Safety
/// `result` must be a live handle; `stats` must be writable.
#[no_mangle]
pub unsafe extern "C" fn corrsense_result_stats(
    result: *const CorrsenseResult,
    stats: *mut CorrsenseSolveStats,
) -> CorrsenseStatus {
    if result.is_null() || stats.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    let r = &*result;
    let exactness = r.exactness.unwrap_or(Exactness {
        exact: false,
        rel_err_x: f64::INFINITY,
        rel_err_f: f64::INFINITY,
    });
    *stats = CorrsenseSolveStats {
        objective: r.inner.objective,
        constraint_residual: r.inner.constraint_residual,
        rel_err_x: exactness.rel_err_x,
        rel_err_f: exactness.rel_err_f,
        iterations: r.inner.iterations,
        converged: r.inner.converged,
        exact: exactness.exact,
    };
    CorrsenseStatus::Ok
}

/// Copies the recovered signal as interleaved (re, im) pairs into `buffer`.
/// `buffer_len` is the number of f64 slots and must be at least `2 * n`.
///
/// # Safety
/// `result` must be a live handle; `buffer` must hold `buffer_len` f64 values.
#[no_mangle]
pub unsafe extern "C" fn corrsense_result_signal(
    result: *const CorrsenseResult,
    buffer: *mut f64,
    buffer_len: usize,
) -> CorrsenseStatus {
    if result.is_null() || buffer.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    let r = &*result;
    if buffer_len < 2 * r.n {
        set_last_error("signal buffer needs 2*n slots");
        return CorrsenseStatus::BufferTooSmall;
    }
    for (i, z) in r.inner.x_hat.iter().enumerate() {
        *buffer.add(2 * i) = z.re;
        *buffer.add(2 * i + 1) = z.im;
    }
    CorrsenseStatus::Ok
}

/// Copies the recovered corruption as interleaved (re, im) pairs.
/// `buffer_len` must be at least `2 * m`.
///
/// # Safety
/// `result` must be a live handle; `buffer` must hold `buffer_len` f64 values.
#[no_mangle]
pub unsafe extern "C" fn corrsense_result_corruption(
    result: *const CorrsenseResult,
    buffer: *mut f64,
    buffer_len: usize,
) -> CorrsenseStatus {
    if result.is_null() || buffer.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    let r = &*result;
    if buffer_len < 2 * r.m {
        set_last_error("corruption buffer needs 2*m slots");
        return CorrsenseStatus::BufferTooSmall;
    }
    for (i, z) in r.inner.f_hat.iter().enumerate() {
        *buffer.add(2 * i) = z.re;
        *buffer.add(2 * i + 1) = z.im;
    }
    CorrsenseStatus::Ok
}

/// Releases a result handle (NULL accepted).
///
/// # Safety
/// `result` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn corrsense_result_free(result: *mut CorrsenseResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Builds and verifies a dual certificate for the instance at the given
/// weight. Writes the overall verdict into `pass` and, when `report_json`
/// is non-NULL, the full per-condition report (free the string with
/// [`corrsense_string_free`]).
///
/// # Safety
/// `instance` must be a live handle; `pass` must be writable; `report_json`
/// may be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn corrsense_certify(
    instance: *const CorrsenseInstance,
    lambda: f64,
    seed: u64,
    pass: *mut bool,
    report_json: *mut *mut c_char,
) -> CorrsenseStatus {
    if instance.is_null() || pass.is_null() {
        return CorrsenseStatus::NullPointer;
    }
    guarded(|| {
        use rand::SeedableRng;
        let inst = &(*instance).inner;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        match build_certificate(inst, lambda, &CertifyOptions::default(), &mut rng) {
            Ok(cert) => {
                *pass = cert.report.pass;
                if !report_json.is_null() {
                    match CString::new(cert.report.to_json()) {
                        Ok(s) => *report_json = s.into_raw(),
                        Err(_) => *report_json = std::ptr::null_mut(),
                    }
                }
                CorrsenseStatus::Ok
            }
            Err(e) => capture(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_static_string() {
        let ptr = corrsense_version();
        let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
        assert_eq!(s, env!("CARGO_PKG_VERSION"));
    }
}
