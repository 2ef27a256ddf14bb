//! Linearized fluctuation dynamics around the anti-Stokes operating point.
//!
//! Quadrature basis, in this order:
//! `(δq_m1, δp_m1, δq_m2, δp_m2, δq_c1, δp_c1, δq_c2, δp_c2)`.

mod lyapunov;
mod stability;

pub use lyapunov::{lyapunov_residual, solve_continuous_lyapunov, solve_lyapunov};
pub use stability::{
    char_poly, eigen_stability, eigenvalues, hurwitz_determinants, hurwitz_matrix, StabilityReport, Verdict,
};

use nalgebra::{DMatrix, SMatrix};

use crate::error::{Error, Result};
use crate::gain::{SystemParams, XiCoefficients};

pub type Matrix8 = SMatrix<f64, 8, 8>;

/// Number of quadratures in the full mechanical + optical state.
pub const DIM: usize = 8;

/// Drift matrix 𝒦 of ∂ₜ𝒰 = 𝒦𝒰 + 𝒩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix8);

/// Symmetrized noise intensity ℛ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub Matrix8);

/// Steady-state symmetrized covariance ϑ (vacuum variance ½).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Matrix8);

impl DriftMatrix {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(DIM, DIM, self.0.iter().copied())
    }
}

impl DiffusionMatrix {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(DIM, DIM, self.0.iter().copied())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.symmetric_eigenvalues().min()
    }

    /// Absolute tolerance below zero still accepted as semidefinite.
    pub fn psd_tolerance(&self) -> f64 {
        1e-12 * self.0.norm()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -self.psd_tolerance()
    }

    /// Fails with [`Error::NotPositiveSemidefinite`] when the noise intensity
    /// has no white-noise realisation.
    pub fn ensure_psd(&self) -> Result<()> {
        let min_eigenvalue = self.min_eigenvalue();
        let tolerance = self.psd_tolerance();
        if min_eigenvalue < -tolerance {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue,
                tolerance,
            });
        }
        Ok(())
    }
}

impl CovarianceMatrix {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(DIM, DIM, self.0.iter().copied())
    }

    pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.shape(), (DIM, DIM));
        CovarianceMatrix(Matrix8::from_iterator(m.iter().copied()))
    }
}

/// Effective cavity linewidths κ̄ⱼ = κⱼ + (−1)ʲΞⱼⱼ.
pub fn effective_linewidths(params: &SystemParams, xi: &XiCoefficients) -> (f64, f64) {
    (params.cavity_1.kappa - xi.xi11, params.cavity_2.kappa + xi.xi22)
}

pub fn build_drift(params: &SystemParams, xi: &XiCoefficients) -> Result<DriftMatrix> {
    params.validate()?;
    let (g1, g2) = params.couplings(xi)?;
    let (kb1, kb2) = effective_linewidths(params, xi);
    let gm1 = params.mirror_1.gamma_m;
    let gm2 = params.mirror_2.gamma_m;

    let mut k = Matrix8::zeros();
    for (i, d) in [-gm1, -gm1, -gm2, -gm2, -kb1, -kb1, -kb2, -kb2].into_iter().enumerate() {
        k[(i, i)] = d;
    }
    // mirror <- cavity (beam-splitter coupling)
    k[(0, 5)] = -g1;
    k[(1, 4)] = g1;
    k[(2, 7)] = -g2;
    k[(3, 6)] = g2;
    // cavity <- mirror
    k[(4, 1)] = -g1;
    k[(5, 0)] = g1;
    k[(6, 3)] = -g2;
    k[(7, 2)] = g2;
    // laser-mode cross coupling
    k[(4, 6)] = xi.xi12;
    k[(5, 7)] = -xi.xi12;
    k[(6, 4)] = -xi.xi21;
    k[(7, 5)] = xi.xi21;
    Ok(DriftMatrix(k))
}

/// Assembles ℛ = ℛ_m ⊕ ℛ_c. Semidefiniteness is not enforced here; see
/// [`DiffusionMatrix::ensure_psd`].
pub fn build_diffusion(params: &SystemParams, xi: &XiCoefficients) -> Result<DiffusionMatrix> {
    params.validate()?;
    let (n1, n2) = params.occupations()?;
    let gm1 = params.mirror_1.gamma_m;
    let gm2 = params.mirror_2.gamma_m;
    let d1 = params.cavity_1.kappa + xi.xi11;
    let d2 = params.cavity_2.kappa + xi.xi22;
    let cross = (xi.xi12 + xi.xi21) / 2.0;

    let mut r = Matrix8::zeros();
    let diag = [
        gm1 * (2.0 * n1 + 1.0),
        gm1 * (2.0 * n1 + 1.0),
        gm2 * (2.0 * n2 + 1.0),
        gm2 * (2.0 * n2 + 1.0),
        d1,
        d1,
        d2,
        d2,
    ];
    for (i, d) in diag.into_iter().enumerate() {
        r[(i, i)] = d;
    }
    r[(4, 6)] = -cross;
    r[(6, 4)] = -cross;
    r[(5, 7)] = cross;
    r[(7, 5)] = cross;
    let r = DiffusionMatrix(r);
    if !r.is_psd() {
        log::warn!(
            "diffusion matrix is not positive semidefinite (min eigenvalue {:e})",
            r.min_eigenvalue()
        );
    }
    Ok(r)
}
