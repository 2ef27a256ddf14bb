use std::ffi::{CStr, CString};
use std::ptr;

use optosteer_ffi::*;

fn last_error() -> String {
    let p = os_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn default_handle_round_trip() {
    let p = os_params_default();
    assert!(!p.is_null());
    let mut xi = OsXi::default();
    unsafe {
        assert_eq!(os_params_set_omega_over_gamma(p, 1.0), OsStatus::Ok);
        assert_eq!(os_compute_xi(p, &mut xi), OsStatus::Ok);
        os_params_free(p);
    }
    let a = 250e6;
    assert!((xi.xi11 - 0.15 * a).abs() < 1e-12 * a);
    assert!((xi.xi22 - 0.25 * a).abs() < 1e-12 * a);
    assert!((xi.xi12 + 0.25 * a).abs() < 1e-12 * a);
    assert!((xi.xi21 + 0.05 * a).abs() < 1e-12 * a);
}

#[test]
fn decoupled_point_through_abi() {
    let p = os_params_default();
    let mut cov = [0.0; 64];
    let mut res = std::mem::MaybeUninit::<OsPointResult>::uninit();
    unsafe {
        assert_eq!(os_params_set_g_over_wm(p, 0, 0.0), OsStatus::Ok);
        assert_eq!(os_params_set_omega_over_gamma(p, 0.1), OsStatus::Ok);
        assert_eq!(os_run_point(p, res.as_mut_ptr()), OsStatus::Ok);
        assert_eq!(os_solve_covariance(p, cov.as_mut_ptr()), OsStatus::Ok);
        os_params_free(p);
    }
    let res = unsafe { res.assume_init() };
    assert_eq!(res.status, OsPointStatus::Ok);
    assert_eq!(res.regime, OsRegime::NoWay);
    assert!(res.stable);
    assert!((res.energy_diff - 20.0).abs() < 1e-8);
    assert!((cov[0] - 15.5).abs() < 1e-10);
    assert!((cov[2 * 8 + 2] - 5.5).abs() < 1e-10);
}

#[test]
fn unstable_point_reports_status() {
    let p = os_params_default();
    let mut cov = [0.0; 64];
    let mut res = std::mem::MaybeUninit::<OsPointResult>::uninit();
    unsafe {
        assert_eq!(os_run_point(p, res.as_mut_ptr()), OsStatus::Ok);
        assert_eq!(os_solve_covariance(p, cov.as_mut_ptr()), OsStatus::Unstable);
        os_params_free(p);
    }
    let res = unsafe { res.assume_init() };
    assert_eq!(res.status, OsPointStatus::Unstable);
    assert_eq!(res.regime, OsRegime::None);
    assert!(res.steering_1to2.is_nan());
    assert!(last_error().contains("not Hurwitz-stable"));
}

#[test]
fn json_config_and_errors() {
    let good = CString::new(r#"{"mirror_1": {"n_th": 3}, "gain": {"omega_over_gamma": 0.05}}"#).unwrap();
    let bad = CString::new(r#"{"mirror_1": {"n_th": 3, "temperature": {"value": 1, "unit": "mK"}}}"#).unwrap();
    let mut p: *mut OsParams = ptr::null_mut();
    unsafe {
        assert_eq!(os_params_from_json(good.as_ptr(), &mut p), OsStatus::Ok);
        assert!(!p.is_null());
        os_params_free(p);
        assert_eq!(os_params_from_json(bad.as_ptr(), &mut p), OsStatus::Config);
        assert!(p.is_null());
    }
    assert!(last_error().contains("mirror_1.temperature"));
}

#[test]
fn setters_validate_and_keep_previous_state() {
    let p = os_params_default();
    let mut xi_before = OsXi::default();
    let mut xi_after = OsXi::default();
    unsafe {
        os_compute_xi(p, &mut xi_before);
        assert_eq!(os_params_set_omega_over_gamma(p, -1.0), OsStatus::InvalidParameter);
        assert_eq!(os_params_set_n_th(p, 3, 1.0), OsStatus::InvalidParameter);
        assert_eq!(os_params_set_g_over_wm(p, 1, f64::NAN), OsStatus::InvalidParameter);
        os_compute_xi(p, &mut xi_after);
        os_params_free(p);
    }
    assert_eq!(xi_before, xi_after);
}

#[test]
fn null_pointers_are_rejected() {
    let mut xi = OsXi::default();
    let mut g = 0.0;
    unsafe {
        assert_eq!(os_compute_xi(ptr::null(), &mut xi), OsStatus::NullPointer);
        assert_eq!(os_params_set_n_th(ptr::null_mut(), 1, 1.0), OsStatus::NullPointer);
        assert_eq!(os_steering(ptr::null(), &mut g, &mut g), OsStatus::NullPointer);
        os_params_free(ptr::null_mut());
        assert!(os_params_clone(ptr::null()).is_null());
    }
}

#[test]
fn steering_of_two_mode_squeezed_vacuum() {
    let r: f64 = 0.5;
    let ch = (2.0 * r).cosh() / 2.0;
    let sh = (2.0 * r).sinh() / 2.0;
    #[rustfmt::skip]
    let v = [
        ch, 0.0, sh, 0.0,
        0.0, ch, 0.0, -sh,
        sh, 0.0, ch, 0.0,
        0.0, -sh, 0.0, ch,
    ];
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(os_steering(v.as_ptr(), &mut a, &mut b), OsStatus::Ok);
    }
    let expected = (2.0 * r).cosh().ln();
    assert!((a - expected).abs() < 1e-12);
    assert!((b - expected).abs() < 1e-12);

    let unphysical = [0.0; 16];
    unsafe {
        assert_ne!(os_steering(unphysical.as_ptr(), &mut a, &mut b), OsStatus::Ok);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(os_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
