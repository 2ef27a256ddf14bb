//! Gaussian EPR steering between the two mechanical modes.
//!
//! Covariances here use the convention of the dynamics (vacuum variance ½).
//! The symplectic route rescales to σ = 2ϑ so that the vacuum is the identity.

use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::dynamics::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::units::HBAR;

/// Values at or below this are numerical zero for classification.
pub const STEERING_TOL: f64 = 1e-9;

/// Two-mode mechanical covariance with blocks `A` (m₁), `B` (m₂), `C` (cross).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechCovariance(pub Matrix4<f64>);

impl MechCovariance {
    pub fn a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn b(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// m₁ measures, m₂ is steered.
    OneToTwo,
    /// m₂ measures, m₁ is steered.
    TwoToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    TwoWay,
    OneWay1To2,
    OneWay2To1,
    NoWay,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::TwoWay => "two_way",
            Regime::OneWay1To2 => "one_way_1to2",
            Regime::OneWay2To1 => "one_way_2to1",
            Regime::NoWay => "no_way",
        }
    }

    pub fn is_one_way(self) -> bool {
        matches!(self, Regime::OneWay1To2 | Regime::OneWay2To1)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringResult {
    pub g_1to2: f64,
    pub g_2to1: f64,
    pub regime: Regime,
    /// ℰ₁ − ℰ₂ in units of ħω_m/2.
    pub energy_diff: f64,
}

impl SteeringResult {
    pub fn from_covariance(v: &MechCovariance) -> Result<Self> {
        let g_1to2 = steering_det(v, Direction::OneToTwo)?;
        let g_2to1 = steering_det(v, Direction::TwoToOne)?;
        Ok(SteeringResult {
            g_1to2,
            g_2to1,
            regime: classify(g_1to2, g_2to1),
            energy_diff: mech_energy_diff(v),
        })
    }
}

/// Rows/columns of the two mechanical modes.
pub fn mech_block(full: &CovarianceMatrix) -> MechCovariance {
    MechCovariance(full.0.fixed_view::<4, 4>(0, 0).into_owned())
}

/// Steerability from the determinant form ½ ln(det V_steering / (4 det V)).
pub fn steering_det(v: &MechCovariance, direction: Direction) -> Result<f64> {
    let det = v.det();
    if !(det > 0.0) {
        return Err(Error::NonPositiveDeterminant { det });
    }
    let party = match direction {
        Direction::OneToTwo => v.a().determinant(),
        Direction::TwoToOne => v.b().determinant(),
    };
    if !(party > 0.0) {
        return Err(Error::SingularBlock { det: party });
    }
    Ok((0.5 * (party / (4.0 * det)).ln()).max(0.0))
}

/// Steerability from the symplectic eigenvalue of the Schur complement of the
/// measuring party in σ = 2ϑ.
pub fn steering_symplectic(v: &MechCovariance, direction: Direction) -> Result<f64> {
    let sigma = v.0 * 2.0;
    let sa = sigma.fixed_view::<2, 2>(0, 0).into_owned();
    let sb = sigma.fixed_view::<2, 2>(2, 2).into_owned();
    let sc = sigma.fixed_view::<2, 2>(0, 2).into_owned();
    let schur = match direction {
        Direction::OneToTwo => {
            let inv = sa.try_inverse().ok_or(Error::SingularBlock { det: sa.determinant() })?;
            sb - sc.transpose() * inv * sc
        }
        Direction::TwoToOne => {
            let inv = sb.try_inverse().ok_or(Error::SingularBlock { det: sb.determinant() })?;
            sa - sc * inv * sc.transpose()
        }
    };
    let det = schur.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPositiveDeterminant { det });
    }
    let nu = det.sqrt();
    Ok((-nu.ln()).max(0.0))
}

/// ℰ₁ − ℰ₂ in units of ħω_m/2 (equal mirror frequencies).
pub fn mech_energy_diff(v: &MechCovariance) -> f64 {
    (v.0[(0, 0)] + v.0[(1, 1)]) - (v.0[(2, 2)] + v.0[(3, 3)])
}

/// Mechanical energies (ℰ₁, ℰ₂) in joules, for mirrors of different frequency.
pub fn mech_energies(v: &MechCovariance, omega_1: f64, omega_2: f64) -> (f64, f64) {
    (
        0.5 * HBAR * omega_1 * (v.0[(0, 0)] + v.0[(1, 1)]),
        0.5 * HBAR * omega_2 * (v.0[(2, 2)] + v.0[(3, 3)]),
    )
}

pub fn classify(g_1to2: f64, g_2to1: f64) -> Regime {
    match (g_1to2 > STEERING_TOL, g_2to1 > STEERING_TOL) {
        (true, true) => Regime::TwoWay,
        (true, false) => Regime::OneWay1To2,
        (false, true) => Regime::OneWay2To1,
        (false, false) => Regime::NoWay,
    }
}

/// Symplectic form ⊕ [[0, 1], [−1, 0]] on `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues (ascending, one per mode) of a covariance `sigma`
/// with (q, p) interleaved ordering.
///
/// Uses the antisymmetric matrix √σ Ω √σ, whose squared singular values are
/// the ν² each appearing twice.
pub fn symplectic_eigenvalues(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = sigma.nrows();
    if !n.is_multiple_of(2) || sigma.ncols() != n {
        return Err(Error::invalid("sigma", "expected an even-dimensional square matrix"));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    if eig.eigenvalues.min() < -1e-10 * scale {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: eig.eigenvalues.min(),
            tolerance: 1e-10 * scale,
        });
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let m = &root * symplectic_form(n / 2) * &root;
    let mut nu2: Vec<f64> = (m.transpose() * &m).symmetric_eigenvalues().iter().map(|x| x.max(0.0)).collect();
    nu2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(nu2.chunks(2).map(|pair| (0.5 * (pair[0] + pair[1])).sqrt()).collect())
}

/// Smallest partially-transposed symplectic eigenvalue ν̃₋ of σ = 2v, from the
/// two-mode invariants. ν̃₋ < 1 ⇔ the state is entangled.
pub fn ppt_min_symplectic(v: &MechCovariance) -> f64 {
    let s = MechCovariance(v.0 * 2.0);
    let delta = s.a().determinant() + s.b().determinant() - 2.0 * s.c().determinant();
    let det = s.det();
    let disc = (delta * delta - 4.0 * det).max(0.0);
    ((delta - disc.sqrt()) / 2.0).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmsv(r: f64) -> MechCovariance {
        let ch = (2.0 * r).cosh() / 2.0;
        let sh = (2.0 * r).sinh() / 2.0;
        MechCovariance(Matrix4::new(
            ch, 0.0, sh, 0.0, //
            0.0, ch, 0.0, -sh, //
            sh, 0.0, ch, 0.0, //
            0.0, -sh, 0.0, ch,
        ))
    }

    #[test]
    fn vacuum_is_not_steerable() {
        let v = MechCovariance(Matrix4::identity() * 0.5);
        for d in [Direction::OneToTwo, Direction::TwoToOne] {
            assert_eq!(steering_det(&v, d).unwrap(), 0.0);
            assert_eq!(steering_symplectic(&v, d).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        // closed form ln cosh(2r) at r = 0.5
        let expected = 0.433_780_830_483_027_2;
        let v = tmsv(0.5);
        for d in [Direction::OneToTwo, Direction::TwoToOne] {
            assert!((steering_det(&v, d).unwrap() - expected).abs() < 1e-12);
            assert!((steering_symplectic(&v, d).unwrap() - expected).abs() < 1e-12);
        }
        assert!(ppt_min_symplectic(&v) < 1.0);
    }

    #[test]
    fn unphysical_determinant_is_rejected() {
        let mut m = Matrix4::identity() * 0.5;
        m[(0, 0)] = -0.5;
        assert!(matches!(
            steering_det(&MechCovariance(m), Direction::OneToTwo),
            Err(Error::NonPositiveDeterminant { .. })
        ));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(0.3, 0.1), Regime::TwoWay);
        assert_eq!(classify(0.2, 0.0), Regime::OneWay1To2);
        assert_eq!(classify(0.0, 0.2), Regime::OneWay2To1);
        assert_eq!(classify(0.0, 0.0), Regime::NoWay);
        assert_eq!(classify(1e-10, 0.5), Regime::OneWay2To1);
    }

    #[test]
    fn mech_block_extracts_leading_rows() {
        let full = CovarianceMatrix(crate::dynamics::Matrix8::from_fn(|i, j| (i * 8 + j) as f64));
        let v = mech_block(&full);
        assert_eq!(v.0[(0, 2)], full.0[(0, 2)]);
        assert_eq!(v.0[(3, 3)], full.0[(3, 3)]);
        let id = mech_block(&CovarianceMatrix(crate::dynamics::Matrix8::identity()));
        assert_eq!(id.0, Matrix4::identity());
    }

    #[test]
    fn thermal_energy_difference() {
        let mut m = Matrix4::zeros();
        for (i, n) in [15.0, 15.0, 5.0, 5.0].into_iter().enumerate() {
            m[(i, i)] = n + 0.5;
        }
        assert!((mech_energy_diff(&MechCovariance(m)) - 20.0).abs() < 1e-14);
        assert_eq!(mech_energy_diff(&tmsv(0.3)), 0.0);
    }

    #[test]
    fn symplectic_spectrum_of_thermal_state() {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 3.0, 1.0, 1.0]));
        let nu = symplectic_eigenvalues(&sigma).unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-12);
        assert!((nu[1] - 3.0).abs() < 1e-12);
        // squeezing does not change the spectrum
        let sq = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 0.25]));
        let nu = symplectic_eigenvalues(&sq).unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-12);
    }
}
