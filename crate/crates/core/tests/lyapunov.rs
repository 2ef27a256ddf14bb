mod common;

use nalgebra::DMatrix;
use optosteer::dynamics::{build_diffusion, build_drift, lyapunov_residual, solve_continuous_lyapunov, solve_lyapunov};
use optosteer::gain::{compute_xi, SystemParams};
use optosteer::Error;

use common::{kronecker_lyapunov, random_psd, random_stable, rng};

#[test]
fn matches_kronecker_oracle_on_random_stable_systems() {
    let mut r = rng(2024);
    for case in 0..50 {
        let n = if case % 5 == 0 { 3 + case % 6 } else { 8 };
        let a = random_stable(&mut r, n);
        let q = random_psd(&mut r, n);
        let x = solve_continuous_lyapunov(&a, &q).unwrap();
        let oracle = kronecker_lyapunov(&a, &q);
        let rel = (&x - &oracle).norm() / oracle.norm();
        assert!(rel <= 1e-10, "case {case}: relative deviation {rel:e}");
        assert!(lyapunov_residual(&a, &x, &q) <= 1e-10 * q.norm());
        assert_eq!(x, x.transpose());
    }
}

#[test]
fn physical_point_matches_kronecker_oracle() {
    let mut p = SystemParams::reference();
    p.set_omega_over_gamma(0.1);
    let xi = compute_xi(&p.gain).unwrap();
    let k = build_drift(&p, &xi).unwrap();
    let r = build_diffusion(&p, &xi).unwrap();
    let x = solve_lyapunov(&k, &r).unwrap().to_dmatrix();
    let oracle = kronecker_lyapunov(&k.to_dmatrix(), &r.to_dmatrix());
    assert!((&x - &oracle).norm() <= 1e-10 * oracle.norm());
}

#[test]
fn unstable_drift_is_refused() {
    let p = SystemParams::reference();
    let xi = compute_xi(&p.gain).unwrap();
    let k = build_drift(&p, &xi).unwrap();
    let r = build_diffusion(&p, &xi).unwrap();
    assert!(matches!(solve_lyapunov(&k, &r), Err(Error::Unstable { .. })));
}

#[test]
fn non_normal_drift_with_repeated_eigenvalues() {
    // Jordan-like block: eigenvalue −1 of multiplicity 4
    let mut a = DMatrix::<f64>::identity(4, 4) * -1.0;
    for i in 0..3 {
        a[(i, i + 1)] = 5.0;
    }
    let q = DMatrix::identity(4, 4);
    let x = solve_continuous_lyapunov(&a, &q).unwrap();
    let oracle = kronecker_lyapunov(&a, &q);
    assert!((&x - &oracle).norm() <= 1e-10 * oracle.norm());
}
