#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix4};
use optosteer::steering::MechCovariance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense vectorized solve of A X + X Aᵀ = −Q through the n²×n² Kronecker system.
pub fn kronecker_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let big = id.kronecker(a) + a.kronecker(&id);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));
    let x = big.lu().solve(&rhs).expect("kronecker system is singular");
    DMatrix::from_iterator(n, n, x.iter().copied())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hurwitz-stable matrix: a random dense matrix shifted left of the
/// imaginary axis by a random margin.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let scale = 10f64.powf(rng.random_range(-1.0..3.0));
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0) * scale);
    let max_re = m
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = rng.random_range(0.05..1.0) * scale;
    m - DMatrix::identity(n, n) * (max_re + margin)
}

pub fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(n, n) * 1e-3
}

fn rotation(theta: f64, mode: usize) -> Matrix4<f64> {
    let mut s = Matrix4::identity();
    let (c, n) = (theta.cos(), theta.sin());
    let k = 2 * mode;
    s[(k, k)] = c;
    s[(k, k + 1)] = n;
    s[(k + 1, k)] = -n;
    s[(k + 1, k + 1)] = c;
    s
}

fn squeezer(r: f64, mode: usize) -> Matrix4<f64> {
    let mut s = Matrix4::identity();
    s[(2 * mode, 2 * mode)] = r.exp();
    s[(2 * mode + 1, 2 * mode + 1)] = (-r).exp();
    s
}

fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, s, //
        -s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    )
}

fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let (ch, sh) = (r.cosh(), r.sinh());
    Matrix4::new(
        ch, 0.0, sh, 0.0, //
        0.0, ch, 0.0, -sh, //
        sh, 0.0, ch, 0.0, //
        0.0, -sh, 0.0, ch,
    )
}

/// Random physical two-mode covariance (vacuum variance ½): a thermal state
/// with symplectic eigenvalues ≥ ½ transformed by a random Gaussian unitary.
pub fn random_physical_state(rng: &mut ChaCha8Rng) -> MechCovariance {
    let a = 0.5 * (1.0 + rng.random_range(0.0..3.0f64).powi(2));
    let b = 0.5 * (1.0 + rng.random_range(0.0..3.0f64).powi(2));
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(a, a, b, b));
    let s = rotation(rng.random_range(0.0..6.3), 0)
        * squeezer(rng.random_range(-0.8..0.8), 1)
        * beam_splitter(rng.random_range(0.0..1.6))
        * two_mode_squeezer(rng.random_range(0.0..1.5))
        * rotation(rng.random_range(0.0..6.3), 1)
        * squeezer(rng.random_range(-0.8..0.8), 0);
    let v = s * d * s.transpose();
    MechCovariance((v + v.transpose()) * 0.5)
}
