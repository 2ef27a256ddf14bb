//! Continuous Lyapunov equation `A X + X Aᵀ = −Q` by Bartels–Stewart.
//!
//! `A` is reduced to real Schur form `A = U T Uᵀ`; the transformed equation
//! `T Y + Y Tᵀ = −Uᵀ Q U` is solved block by block (1×1 and 2×2 diagonal
//! blocks of the quasi-triangular `T`), working from the bottom-right corner.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

use super::{eigen_stability, CovarianceMatrix, DiffusionMatrix, DriftMatrix};
use crate::error::{Error, Result};

const SCHUR_MAX_ITER: usize = 10_000;

/// Steady-state covariance of the linearized dynamics.
///
/// Refuses unstable drifts with [`Error::Unstable`]; a numerical breakdown of
/// the solver is reported as [`Error::Lyapunov`].
pub fn solve_lyapunov(k: &DriftMatrix, r: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    let (max_real_eig, stable) = eigen_stability(k)?;
    if !stable {
        return Err(Error::Unstable { max_real_eig });
    }
    let x = solve_continuous_lyapunov(&k.to_dmatrix(), &r.to_dmatrix())?;
    Ok(CovarianceMatrix::from_dmatrix(&x))
}

/// Frobenius residual ‖A X + X Aᵀ + Q‖.
pub fn lyapunov_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (a * x + x * a.transpose() + q).norm()
}

/// Solves `A X + X Aᵀ = −Q` for square `A`, returning the symmetrized solution.
pub fn solve_continuous_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::Lyapunov(format!(
            "dimension mismatch: A is {:?}, Q is {:?}",
            a.shape(),
            q.shape()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::EigenNonConvergence)?;
    let (u, t) = schur.unpack();
    let c = -(u.transpose() * q * &u);
    let y = solve_quasi_triangular(&t, &c)?;
    let x = &u * y * u.transpose();
    Ok((&x + x.transpose()) * 0.5)
}

/// Diagonal blocks `(start, size)` of an upper quasi-triangular matrix.
fn diagonal_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let two = i + 1 < n && {
            let sub = t[(i + 1, i)].abs();
            sub > f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs())
        };
        if two {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

/// Solves `T Y + Y Tᵀ = C` for quasi-upper-triangular `T`.
fn solve_quasi_triangular(t: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let blocks = diagonal_blocks(t);
    let mut y = DMatrix::<f64>::zeros(n, n);

    for &(i0, ni) in blocks.iter().rev() {
        for &(j0, nj) in blocks.iter().rev() {
            let mut rhs = c.view((i0, j0), (ni, nj)).clone_owned();
            let below = i0 + ni;
            if below < n {
                rhs -= t.view((i0, below), (ni, n - below)) * y.view((below, j0), (n - below, nj));
            }
            let right = j0 + nj;
            if right < n {
                rhs -= y.view((i0, right), (ni, n - right)) * t.view((j0, right), (nj, n - right)).transpose();
            }
            let tii = t.view((i0, i0), (ni, ni));
            let tjj = t.view((j0, j0), (nj, nj));
            let block = solve_small_sylvester(&tii.clone_owned(), &tjj.clone_owned(), &rhs)?;
            y.view_mut((i0, j0), (ni, nj)).copy_from(&block);
        }
    }
    Ok(y)
}

/// Solves `P Y + Y Sᵀ = R` with `P`, `S` of size at most 2 by vectorization.
fn solve_small_sylvester(p: &DMatrix<f64>, s: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (ni, nj) = (p.nrows(), s.nrows());
    let m = ni * nj;
    let mut sys = DMatrix::<f64>::zeros(m, m);
    // column-major vec: index(row, col) = col * ni + row
    for col in 0..nj {
        for row in 0..ni {
            let eq = col * ni + row;
            for k in 0..ni {
                sys[(eq, col * ni + k)] += p[(row, k)];
            }
            for l in 0..nj {
                sys[(eq, l * ni + row)] += s[(col, l)];
            }
        }
    }
    let rhs = DMatrix::from_iterator(m, 1, r.iter().copied());
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Lyapunov("singular block: eigenvalues of A and -A overlap".into()))?;
    Ok(DMatrix::from_iterator(ni, nj, sol.iter().copied()))
}
