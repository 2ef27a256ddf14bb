//! C ABI over `optosteer`.
//!
//! Parameters live behind an opaque `OsParams` handle. Every fallible call
//! returns an [`OsStatus`]; on failure the message is available from
//! [`os_last_error`] on the same thread until the next failing call.
//! Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use optosteer::config::parse_config;
use optosteer::dynamics::{build_diffusion, build_drift, solve_lyapunov, Matrix8};
use optosteer::gain::{compute_xi, SystemParams};
use optosteer::steering::{steering_det, Direction, MechCovariance, Regime};
use optosteer::sweep::{run_point, Status};
use optosteer::Error;

/// Error codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Config = 3,
    Unstable = 4,
    NotPositiveSemidefinite = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsPointStatus {
    Ok = 0,
    Unstable = 1,
    Marginal = 2,
    RNotPsd = 3,
    Error = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsRegime {
    /// No steering value (point not `OK`).
    None = -1,
    NoWay = 0,
    OneWayOneToTwo = 1,
    OneWayTwoToOne = 2,
    TwoWay = 3,
}

/// Gain-medium rates in rad/s.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OsXi {
    pub xi11: f64,
    pub xi22: f64,
    pub xi12: f64,
    pub xi21: f64,
}

/// One evaluated parameter point. Absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsPointResult {
    pub status: OsPointStatus,
    pub stable: bool,
    pub steering_1to2: f64,
    pub steering_2to1: f64,
    pub regime: OsRegime,
    pub energy_diff: f64,
    /// True when `energy_diff` is in joules (unequal mirror frequencies).
    pub energy_in_joules: bool,
    pub max_real_eig: f64,
    pub hurwitz_min: f64,
    pub lyapunov_residual: f64,
}

/// Opaque parameter set.
pub struct OsParams {
    inner: SystemParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OsStatus {
    match e.root() {
        Error::InvalidParameter { .. } => OsStatus::InvalidParameter,
        Error::Config { .. } | Error::Json(_) => OsStatus::Config,
        Error::Unstable { .. } => OsStatus::Unstable,
        Error::NotPositiveSemidefinite { .. } => OsStatus::NotPositiveSemidefinite,
        Error::Io(_) => OsStatus::Io,
        _ => OsStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> OsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OsStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            OsStatus::Panic
        }
    }
}

fn null_error(what: &str) -> OsStatus {
    set_last_error(format!("null pointer: {what}"));
    OsStatus::NullPointer
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn os_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn os_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reference parameter set. Release with [`os_params_free`].
#[no_mangle]
pub extern "C" fn os_params_default() -> *mut OsParams {
    Box::into_raw(Box::new(OsParams {
        inner: SystemParams::reference(),
    }))
}

/// Parses a JSON configuration document into a new handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn os_params_from_json(json: *const c_char, out: *mut *mut OsParams) -> OsStatus {
    if json.is_null() {
        return null_error("json");
    }
    if out.is_null() {
        return null_error("out");
    }
    *out = ptr::null_mut();
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(e) => {
            set_last_error(format!("json is not UTF-8: {e}"));
            return OsStatus::Config;
        }
    };
    guard(|| {
        let cfg = parse_config(text)?;
        *out = Box::into_raw(Box::new(OsParams { inner: cfg.params }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `params` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn os_params_free(params: *mut OsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Copies a handle.
///
/// # Safety
/// `params` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn os_params_clone(params: *const OsParams) -> *mut OsParams {
    match params.as_ref() {
        Some(p) => Box::into_raw(Box::new(OsParams { inner: p.inner })),
        None => ptr::null_mut(),
    }
}

unsafe fn with_params_mut(params: *mut OsParams, f: impl FnOnce(&mut SystemParams) -> Result<(), Error>) -> OsStatus {
    match params.as_mut() {
        Some(p) => {
            let mut candidate = p.inner;
            guard(|| {
                f(&mut candidate)?;
                candidate.validate()?;
                p.inner = candidate;
                Ok(())
            })
        }
        None => null_error("params"),
    }
}

fn check_index(index: u8) -> Result<(), Error> {
    if index > 2 {
        return Err(Error::InvalidParameter {
            name: "index".into(),
            reason: format!("expected 0 (both), 1 or 2, got {index}"),
        });
    }
    Ok(())
}

fn check_ratio(name: &str, v: f64) -> Result<(), Error> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidParameter {
            name: name.into(),
            reason: format!("must be finite and >= 0, got {v}"),
        });
    }
    Ok(())
}

/// Sets Ω/γ.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_params_set_omega_over_gamma(params: *mut OsParams, ratio: f64) -> OsStatus {
    with_params_mut(params, |p| {
        check_ratio("omega_over_gamma", ratio)?;
        p.set_omega_over_gamma(ratio);
        Ok(())
    })
}

/// Sets the thermal occupation of mirror `index` (1 or 2; 0 sets both).
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_params_set_n_th(params: *mut OsParams, index: u8, n_th: f64) -> OsStatus {
    with_params_mut(params, |p| {
        check_index(index)?;
        check_ratio("n_th", n_th)?;
        for i in [1, 2] {
            if index == 0 || index == i {
                p.set_n_th(i, n_th);
            }
        }
        Ok(())
    })
}

/// Sets G/ω_m of cavity `index` (1 or 2; 0 sets both).
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn os_params_set_g_over_wm(params: *mut OsParams, index: u8, ratio: f64) -> OsStatus {
    with_params_mut(params, |p| {
        check_index(index)?;
        check_ratio("g_over_wm", ratio)?;
        for i in [1, 2] {
            if index == 0 || index == i {
                p.set_g_over_wm(i, ratio);
            }
        }
        Ok(())
    })
}

/// Gain-medium rates for the handle's laser parameters.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn os_compute_xi(params: *const OsParams, out: *mut OsXi) -> OsStatus {
    let Some(p) = params.as_ref() else {
        return null_error("params");
    };
    let Some(out) = out.as_mut() else {
        return null_error("out");
    };
    guard(|| {
        let xi = compute_xi(&p.inner.gain)?;
        *out = OsXi {
            xi11: xi.xi11,
            xi22: xi.xi22,
            xi12: xi.xi12,
            xi21: xi.xi21,
        };
        Ok(())
    })
}

/// Evaluates stability, covariance, steering and energy at the handle's point.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn os_run_point(params: *const OsParams, out: *mut OsPointResult) -> OsStatus {
    let Some(p) = params.as_ref() else {
        return null_error("params");
    };
    let Some(out) = out.as_mut() else {
        return null_error("out");
    };
    guard(|| {
        let row = run_point(&p.inner)?;
        *out = OsPointResult {
            status: match row.status {
                Status::Ok => OsPointStatus::Ok,
                Status::Unstable => OsPointStatus::Unstable,
                Status::Marginal => OsPointStatus::Marginal,
                Status::RNotPsd => OsPointStatus::RNotPsd,
                Status::Error => OsPointStatus::Error,
            },
            stable: row.stable,
            steering_1to2: row.steering_1to2.unwrap_or(f64::NAN),
            steering_2to1: row.steering_2to1.unwrap_or(f64::NAN),
            regime: match row.regime {
                None => OsRegime::None,
                Some(Regime::NoWay) => OsRegime::NoWay,
                Some(Regime::OneWay1To2) => OsRegime::OneWayOneToTwo,
                Some(Regime::OneWay2To1) => OsRegime::OneWayTwoToOne,
                Some(Regime::TwoWay) => OsRegime::TwoWay,
            },
            energy_diff: row.energy_diff.unwrap_or(f64::NAN),
            energy_in_joules: row.energy_in_joules,
            max_real_eig: row.max_real_eig,
            hurwitz_min: row.hurwitz_min,
            lyapunov_residual: row.lyapunov_residual.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Steady-state 8×8 covariance, written row-major into `out[64]`.
/// Fails with `UNSTABLE` when no steady state exists.
///
/// # Safety
/// `params` must be a live handle and `out` must point to 64 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn os_solve_covariance(params: *const OsParams, out: *mut f64) -> OsStatus {
    let Some(p) = params.as_ref() else {
        return null_error("params");
    };
    if out.is_null() {
        return null_error("out");
    }
    let out = std::slice::from_raw_parts_mut(out, 64);
    guard(|| {
        let xi = compute_xi(&p.inner.gain)?;
        let k = build_drift(&p.inner, &xi)?;
        let r = build_diffusion(&p.inner, &xi)?;
        let v = solve_lyapunov(&k, &r)?;
        write_row_major(&v.0, out);
        Ok(())
    })
}

fn write_row_major(m: &Matrix8, out: &mut [f64]) {
    for i in 0..8 {
        for j in 0..8 {
            out[i * 8 + j] = m[(i, j)];
        }
    }
}

/// Steering in both directions for a two-mode covariance given row-major in
/// `v[16]` (vacuum variance ½).
///
/// # Safety
/// `v` must point to 16 readable doubles; `g_1to2` and `g_2to1` must be valid.
#[no_mangle]
pub unsafe extern "C" fn os_steering(v: *const f64, g_1to2: *mut f64, g_2to1: *mut f64) -> OsStatus {
    if v.is_null() {
        return null_error("v");
    }
    if g_1to2.is_null() || g_2to1.is_null() {
        return null_error("output");
    }
    let data = std::slice::from_raw_parts(v, 16);
    guard(|| {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "v".into(),
                reason: "entries must be finite".into(),
            });
        }
        let m = MechCovariance(nalgebra::Matrix4::from_row_slice(data));
        let a = steering_det(&m, Direction::OneToTwo)?;
        let b = steering_det(&m, Direction::TwoToOne)?;
        *g_1to2 = a;
        *g_2to1 = b;
        Ok(())
    })
}
