//! Stability of the drift matrix by two independent routes: the eigenvalue
//! spectrum, and the Routh–Hurwitz determinant cascade on the characteristic
//! polynomial obtained from a trace recursion.

use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix};

use super::DriftMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of a square matrix via its real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenNonConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest eigenvalue real part and whether it is strictly negative.
pub fn eigen_stability(k: &DriftMatrix) -> Result<(f64, bool)> {
    let max = eigenvalues(&k.to_dmatrix())?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((max, max < 0.0))
}

/// Coefficients `[1, a₁, …, aₙ]` of det(χI − M) = χⁿ + a₁χⁿ⁻¹ + … + aₙ by the
/// Faddeev–LeVerrier recursion.
pub fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "characteristic polynomial of a non-square matrix");
    let id = DMatrix::<f64>::identity(n, n);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut aux = id.clone();
    for k in 1..=n {
        let prod = m * &aux;
        let c = -prod.trace() / k as f64;
        coeffs.push(c);
        aux = prod + &id * c;
    }
    coeffs
}

/// Hurwitz matrix of `a = [a₀, …, aₙ]`: entry (i, j) is a_{2j−i+1}
/// (0-based), zero outside 0..=n.
pub fn hurwitz_matrix(a: &[f64]) -> DMatrix<f64> {
    let n = a.len().saturating_sub(1);
    DMatrix::from_fn(n, n, |i, j| {
        let idx = 2 * j as isize - i as isize + 1;
        if idx >= 0 && (idx as usize) <= n {
            a[idx as usize]
        } else {
            0.0
        }
    })
}

/// Leading principal minors Λ₁..Λₙ of the Hurwitz matrix.
pub fn hurwitz_determinants(a: &[f64]) -> Vec<f64> {
    let h = hurwitz_matrix(a);
    let n = h.nrows();
    (1..=n).map(|k| h.view((0, 0), (k, k)).clone_owned().determinant()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    /// Max real part within (−10⁻⁹·ω_ref, 0).
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub max_real_eig: f64,
    /// Rate used to normalize 𝒦 before the polynomial route (∞-norm of 𝒦).
    pub scale: f64,
    /// Characteristic coefficients of 𝒦/scale, a₀ = 1.
    pub char_coeffs: Vec<f64>,
    /// Hurwitz determinants of the normalized polynomial.
    pub hurwitz: Vec<f64>,
    pub stable_by_eig: bool,
    pub stable_by_rh: bool,
}

impl StabilityReport {
    /// Runs both stability routes on `k`.
    ///
    /// The polynomial route works on 𝒦/s with s the ∞-norm of 𝒦, so the
    /// coefficients stay O(1) instead of spanning s⁸ (and Λ₈ s³⁶). Scaling by a
    /// positive constant does not change any sign.
    pub fn analyze(k: &DriftMatrix) -> Result<Self> {
        let (max_real_eig, stable_by_eig) = eigen_stability(k)?;
        let m = k.to_dmatrix();
        let scale = m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let char_coeffs = char_poly(&(m / scale));
        let hurwitz = hurwitz_determinants(&char_coeffs);
        let stable_by_rh = hurwitz.iter().all(|&l| l > 0.0);
        Ok(StabilityReport {
            max_real_eig,
            scale,
            char_coeffs,
            hurwitz,
            stable_by_eig,
            stable_by_rh,
        })
    }

    pub fn hurwitz_min(&self) -> f64 {
        self.hurwitz.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when the smallest Λₙ lies inside the band where the two verdicts may
    /// legitimately disagree.
    pub fn in_boundary_band(&self) -> bool {
        self.hurwitz.iter().any(|l| l.abs() <= 1e-6)
    }

    pub fn verdict(&self, omega_ref: f64) -> Verdict {
        if self.max_real_eig >= 0.0 {
            Verdict::Unstable
        } else if self.max_real_eig > -1e-9 * omega_ref {
            Verdict::Marginal
        } else {
            Verdict::Stable
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        assert_eq!(char_poly(&m), vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn hurwitz_two_by_two() {
        let l = hurwitz_determinants(&[1.0, 3.0, 2.0]);
        assert_eq!(l.len(), 2);
        assert!((l[0] - 3.0).abs() < 1e-15);
        assert!((l[1] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_marginal_oscillator() {
        let l = hurwitz_determinants(&[1.0, 0.0, 1.0]);
        assert_eq!(l[0], 0.0);
    }

    #[test]
    fn hurwitz_matrix_layout_for_degree_eight() {
        let a: Vec<f64> = (0..=8).map(|i| i as f64 + 100.0).collect();
        let h = hurwitz_matrix(&a);
        // first two rows: a1 a3 a5 a7 0 ... / a0 a2 a4 a6 a8 0 ...
        let row0: Vec<f64> = h.row(0).iter().copied().collect();
        assert_eq!(row0, vec![101.0, 103.0, 105.0, 107.0, 0.0, 0.0, 0.0, 0.0]);
        let row1: Vec<f64> = h.row(1).iter().copied().collect();
        assert_eq!(row1, vec![100.0, 102.0, 104.0, 106.0, 108.0, 0.0, 0.0, 0.0]);
        let row7: Vec<f64> = h.row(7).iter().copied().collect();
        assert_eq!(row7, vec![0.0, 0.0, 0.0, 100.0, 102.0, 104.0, 106.0, 108.0]);
        let row6: Vec<f64> = h.row(6).iter().copied().collect();
        assert_eq!(row6, vec![0.0, 0.0, 0.0, 101.0, 103.0, 105.0, 107.0, 0.0]);
    }

    #[test]
    fn diagonal_drift_is_stable() {
        let mut k = super::super::Matrix8::zeros();
        for i in 0..8 {
            k[(i, i)] = -(i as f64 + 1.0);
        }
        let (max, stable) = eigen_stability(&DriftMatrix(k)).unwrap();
        assert!((max + 1.0).abs() < 1e-12);
        assert!(stable);
        let report = StabilityReport::analyze(&DriftMatrix(k)).unwrap();
        assert!(report.stable_by_rh);
        assert_eq!(report.verdict(1.0), Verdict::Stable);
    }
}
