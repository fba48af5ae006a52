//! C ABI over `bergman-core`.
//!
//! Every function returns a [`BergmanStatus`]; outputs go through pointer
//! arguments. On failure the message is available from
//! [`bergman_last_error`] on the same thread. Handles are opaque and must be
//! released with their `_free` function; strings returned by the library
//! are released with [`bergman_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bergman_core::algebraic::{self, DegreeBudget, KernelFamily, DEFAULT_TOL};
use bergman_core::asymptotics::{fit_blowup_exponent, sample_along_ray, BoundaryRay};
use bergman_core::ellipsoid::{self, ConvexBody, EllipsoidParams, RealQuadric};
use bergman_core::kernel::{ball_kernel, DiagonalPoint, EggDomain};
use bergman_core::report;
use bergman_core::verify::{self, Family};
use bergman_core::Error;
use nalgebra::DVector;
use num_complex::Complex64;

/// Status codes. Values 1 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BergmanStatus {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Convergence = 3,
    TheoremViolation = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Egg domain handle.
pub struct BergmanEgg {
    inner: EggDomain,
}

/// Real ellipsoid `E(A)` handle.
pub struct BergmanEllipsoid {
    inner: EllipsoidParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BergmanStatus {
    match e.exit_code() {
        1 => BergmanStatus::Io,
        3 => BergmanStatus::Convergence,
        4 => BergmanStatus::TheoremViolation,
        _ => BergmanStatus::Validation,
    }
}

fn guard<F: FnOnce() -> Result<(), BergmanStatusError>>(f: F) -> BergmanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BergmanStatus::Ok,
        Ok(Err(BergmanStatusError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BergmanStatus::Panic
        }
    }
}

struct BergmanStatusError(BergmanStatus, String);

impl From<Error> for BergmanStatusError {
    fn from(e: Error) -> Self {
        BergmanStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> BergmanStatusError {
    BergmanStatusError(BergmanStatus::NullPointer, format!("{what} is null"))
}

fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), BergmanStatusError> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { out.write(v) };
    Ok(())
}

fn json_out(v: &serde_json::Value, out: *mut *mut c_char) -> Result<(), BergmanStatusError> {
    let text = report::to_json_string(&report::with_schema(v.clone()))?;
    let c = CString::new(text).map_err(|e| BergmanStatusError(BergmanStatus::Validation, e.to_string()))?;
    write(out, c.into_raw(), "out")
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bergman_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bergman_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bergman_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates the egg `{|z|^2 + |w|^{2s} < 1}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_egg_new(s: f64, out: *mut *mut BergmanEgg) -> BergmanStatus {
    guard(|| {
        let inner = EggDomain::new(s)?;
        write(out, Box::into_raw(Box::new(BergmanEgg { inner })), "out")
    })
}

/// Releases an egg handle. Null is ignored.
///
/// # Safety
/// `egg` must come from [`bergman_egg_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bergman_egg_free(egg: *mut BergmanEgg) {
    if !egg.is_null() {
        drop(Box::from_raw(egg));
    }
}

unsafe fn egg_ref<'a>(egg: *const BergmanEgg) -> Result<&'a EggDomain, BergmanStatusError> {
    egg.as_ref().map(|e| &e.inner).ok_or_else(|| null("egg"))
}

/// Closed-form kernel on the diagonal at reduced coordinates
/// `x = |z|^2`, `y = |w|^2`.
///
/// # Safety
/// `egg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_egg_kernel(egg: *const BergmanEgg, x: f64, y: f64, out: *mut f64) -> BergmanStatus {
    guard(|| {
        let v = egg_ref(egg)?.kernel_closed_reduced(x, y)?;
        write(out, v, "out")
    })
}

/// Monomial-series kernel with its tail bound.
///
/// # Safety
/// `egg` must be a live handle; `value` and `tail_bound` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_egg_kernel_series(
    egg: *const BergmanEgg,
    x: f64,
    y: f64,
    rel_tol: f64,
    value: *mut f64,
    tail_bound: *mut f64,
) -> BergmanStatus {
    guard(|| {
        let v = egg_ref(egg)?.kernel_series_reduced(x, y, rel_tol)?;
        write(value, v.value, "value")?;
        write(tail_bound, v.tail_bound, "tail_bound")
    })
}

/// Kernel of the unit ball of C^2 on the diagonal.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_ball_kernel(z_re: f64, z_im: f64, w_re: f64, w_im: f64, out: *mut f64) -> BergmanStatus {
    guard(|| {
        let v = ball_kernel(&[Complex64::new(z_re, z_im), Complex64::new(w_re, w_im)])?;
        write(out, v, "out")
    })
}

/// Blow-up exponent `m` and type estimate `r = -2/(m+2)` along the ray
/// `xi + t dir`, `t` geometric in `[t_min, t_max]`.
///
/// # Safety
/// `egg` must be a live handle, `xi` and `dir` point to 4 doubles, and
/// `slope`, `r_estimate` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_egg_blowup_exponent(
    egg: *const BergmanEgg,
    xi: *const f64,
    dir: *const f64,
    t_min: f64,
    t_max: f64,
    n_points: usize,
    slope: *mut f64,
    r_estimate: *mut f64,
) -> BergmanStatus {
    guard(|| {
        let dom = egg_ref(egg)?;
        if xi.is_null() || dir.is_null() {
            return Err(null("xi or dir"));
        }
        let xi = std::slice::from_raw_parts(xi, 4);
        let dir = std::slice::from_raw_parts(dir, 4);
        let base = DiagonalPoint::from_coords([xi[0], xi[1], xi[2], xi[3]]);
        let ray = BoundaryRay::new(dom, base, [dir[0], dir[1], dir[2], dir[3]], t_min, t_max)?;
        let fit = fit_blowup_exponent(&sample_along_ray(dom, &ray, n_points)?)?;
        write(slope, fit.slope, "slope")?;
        write(r_estimate, fit.r_estimate, "r_estimate")
    })
}

/// Algebraic degree and total degree of the egg kernel (integer `s`).
///
/// # Safety
/// `d` and `total_degree` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_egg_degree(s: u32, seed: u64, d: *mut u32, total_degree: *mut u32) -> BergmanStatus {
    guard(|| {
        let fd = algebraic::detect_family(KernelFamily::EggReduced { s }, DegreeBudget::default(), DEFAULT_TOL, seed, 1.0)?;
        let c = fd.detection.candidate().ok_or_else(|| {
            BergmanStatusError(BergmanStatus::Convergence, "no relation within the default budget".into())
        })?;
        write(d, c.d_y as u32, "d")?;
        write(total_degree, c.total_degree as u32, "total_degree")
    })
}

/// Creates `E(A)` from `n` nondecreasing parameters in `[0, 1/2)`.
///
/// # Safety
/// `a` must point to `n` doubles and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_ellipsoid_new(a: *const f64, n: usize, out: *mut *mut BergmanEllipsoid) -> BergmanStatus {
    guard(|| {
        if a.is_null() {
            return Err(null("a"));
        }
        let inner = EllipsoidParams::new(std::slice::from_raw_parts(a, n).to_vec())?;
        write(out, Box::into_raw(Box::new(BergmanEllipsoid { inner })), "out")
    })
}

/// Releases an ellipsoid handle. Null is ignored.
///
/// # Safety
/// `e` must come from [`bergman_ellipsoid_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bergman_ellipsoid_free(e: *mut BergmanEllipsoid) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

unsafe fn ellipsoid_ref<'a>(e: *const BergmanEllipsoid) -> Result<&'a EllipsoidParams, BergmanStatusError> {
    e.as_ref().map(|e| &e.inner).ok_or_else(|| null("ellipsoid"))
}

/// Hausdorff distance from `E(A)` to the unit ball.
///
/// # Safety
/// `e` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_ellipsoid_hausdorff(e: *const BergmanEllipsoid, directions: usize, out: *mut f64) -> BergmanStatus {
    guard(|| {
        let body = ConvexBody::ellipsoid(ellipsoid_ref(e)?.clone());
        let est = ellipsoid::hausdorff_to_ball(&body, directions, ellipsoid::DEFAULT_REFINE_STEPS)?;
        write(out, est.epsilon, "out")
    })
}

/// Longest chord of `E(A)` along real axis `axis` (interleaved
/// `Re z_1, Im z_1, ...`).
///
/// # Safety
/// `e` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_ellipsoid_chord(e: *const BergmanEllipsoid, axis: usize, out: *mut f64) -> BergmanStatus {
    guard(|| {
        let p = ellipsoid_ref(e)?;
        let m = 2 * p.dim();
        if axis >= m {
            return Err(BergmanStatusError(BergmanStatus::Validation, format!("axis {axis} out of range 0..{m}")));
        }
        let mut d = DVector::zeros(m);
        d[axis] = 1.0;
        let v = ConvexBody::ellipsoid(p.clone()).longest_chord(&d)?;
        write(out, v, "out")
    })
}

/// Normal form of a quadric given as JSON `{H, B, r1, r0}`; writes the
/// report JSON to `out` (free with [`bergman_string_free`]).
///
/// # Safety
/// `quadric_json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_normalize_quadric(quadric_json: *const c_char, out: *mut *mut c_char) -> BergmanStatus {
    guard(|| {
        if quadric_json.is_null() {
            return Err(null("quadric_json"));
        }
        let text = CStr::from_ptr(quadric_json)
            .to_str()
            .map_err(|e| BergmanStatusError(BergmanStatus::Validation, e.to_string()))?;
        let v: serde_json::Value = serde_json::from_str(text).map_err(Error::from)?;
        let nrm = ellipsoid::normalize_ellipsoid(&RealQuadric::from_json(&v)?)?;
        json_out(&nrm.to_json(), out)
    })
}

/// Runs the egg verification suite; the report JSON is written even when a
/// check fails, in which case the status is `Convergence` or
/// `TheoremViolation`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bergman_verify_egg(s: u32, seed: u64, out: *mut *mut c_char) -> BergmanStatus {
    guard(|| {
        let r = verify::run(&Family::Egg { s }, seed)?;
        json_out(&r.to_json(), out)?;
        match r.exit_code() {
            0 => Ok(()),
            4 => Err(BergmanStatusError(BergmanStatus::TheoremViolation, r.failed.join(", "))),
            _ => Err(BergmanStatusError(BergmanStatus::Convergence, r.failed.join(", "))),
        }
    })
}
