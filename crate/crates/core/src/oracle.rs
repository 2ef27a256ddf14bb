//! Monte Carlo check of the steady state: Euler–Maruyama integration of
//! dx = K x dt + B dW with B Bᵀ = ℛ, averaged over time and trajectories.
//!
//! Each trajectory draws from its own ChaCha stream selected by
//! `(seed, trajectory index)`, so the estimate does not depend on how
//! trajectories are scheduled across threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dynamics::eigenvalues;
use crate::error::{Error, Result};

/// Fraction of 1/max|eig(K)| used as the default step.
pub const DEFAULT_STEP_FRACTION: f64 = 0.05;
const BOOTSTRAP_RESAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub burn_in_fraction: f64,
    pub seed: u64,
}

impl OracleConfig {
    /// Config with dt = 0.05 / max|eig(K)| and half the run discarded as burn-in.
    pub fn for_drift(k: &DMatrix<f64>, n_steps: usize, n_trajectories: usize, seed: u64) -> Result<Self> {
        let rate = spectral_radius(k)?;
        if !(rate > 0.0) {
            return Err(Error::invalid("drift", "zero drift has no time scale"));
        }
        Ok(OracleConfig {
            dt: DEFAULT_STEP_FRACTION / rate,
            n_steps,
            n_trajectories,
            burn_in_fraction: 0.5,
            seed,
        })
    }

    pub fn validate(&self, k: &DMatrix<f64>) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        let margin = self.dt * spectral_radius(k)?;
        if margin >= 0.1 {
            return Err(Error::invalid(
                "dt",
                format!("dt·max|eig(K)| = {margin:.3} must stay below 0.1"),
            ));
        }
        if self.n_trajectories < 100 {
            return Err(Error::invalid("n_trajectories", "at least 100 trajectories are required"));
        }
        if !(self.burn_in_fraction > 0.0 && self.burn_in_fraction < 1.0) {
            return Err(Error::invalid("burn_in_fraction", "must lie in (0, 1)"));
        }
        if self.samples() == 0 {
            return Err(Error::invalid("n_steps", "no samples remain after burn-in"));
        }
        Ok(())
    }

    fn burn_in(&self) -> usize {
        (self.n_steps as f64 * self.burn_in_fraction).ceil() as usize
    }

    fn samples(&self) -> usize {
        self.n_steps.saturating_sub(self.burn_in())
    }
}

fn spectral_radius(k: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(k)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Factor B with B Bᵀ = ℛ from the symmetric eigen-decomposition; eigenvalues
/// down to −10⁻¹²‖ℛ‖ are clipped to zero.
pub fn noise_factor(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (r + r.transpose()) * 0.5;
    let tolerance = 1e-12 * sym.norm();
    let eig = sym.symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue < -tolerance {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue,
            tolerance,
        });
    }
    let root = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    Ok(&eig.eigenvectors * root)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    /// Time-and-ensemble averaged symmetric covariance.
    pub estimate: DMatrix<f64>,
    /// Bootstrap (over trajectories) standard error of the Frobenius deviation.
    pub stderr: f64,
}

/// Integrates `n_trajectories` independent paths from x(0) = 0.
pub fn simulate_covariance(k: &DMatrix<f64>, b: &DMatrix<f64>, cfg: &OracleConfig) -> Result<OracleEstimate> {
    let n = k.nrows();
    if k.ncols() != n || b.nrows() != n {
        return Err(Error::invalid("noise_factor", "dimensions do not match the drift"));
    }
    cfg.validate(k)?;

    let per_traj: Vec<Vec<f64>> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|idx| run_trajectory(k, b, cfg, idx))
        .collect::<Result<_>>()?;

    let mean = average(&per_traj, n, (0..per_traj.len()).collect::<Vec<_>>().iter().copied());
    let stderr = bootstrap_stderr(&per_traj, n, &mean, cfg.seed);
    Ok(OracleEstimate {
        estimate: mean,
        stderr,
    })
}

/// Second-moment accumulator (row-major n×n) of one trajectory after burn-in.
fn run_trajectory(k: &DMatrix<f64>, b: &DMatrix<f64>, cfg: &OracleConfig, idx: usize) -> Result<Vec<f64>> {
    let n = k.nrows();
    let m = b.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(idx as u64);

    let kd: Vec<f64> = (0..n * n).map(|p| k[(p / n, p % n)] * cfg.dt).collect();
    let sq = cfg.dt.sqrt();
    let bd: Vec<f64> = (0..n * m).map(|p| b[(p / m, p % m)] * sq).collect();
    let noise_scale = bd.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let limit = 1e6 * noise_scale / (cfg.dt * spectral_radius(k)?).sqrt();

    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut xi = vec![0.0; m];
    let mut acc = vec![0.0; n * n];
    let burn_in = cfg.burn_in();

    for step in 0..cfg.n_steps {
        for z in xi.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        for i in 0..n {
            let mut s = x[i];
            let row = &kd[i * n..(i + 1) * n];
            for j in 0..n {
                s += row[j] * x[j];
            }
            let brow = &bd[i * m..(i + 1) * m];
            for j in 0..m {
                s += brow[j] * xi[j];
            }
            next[i] = s;
        }
        std::mem::swap(&mut x, &mut next);

        if step % 1024 == 0 {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm <= limit) {
                return Err(Error::TrajectoryDiverged {
                    trajectory: idx,
                    step,
                    norm,
                });
            }
        }
        if step >= burn_in {
            for i in 0..n {
                let xi_ = x[i];
                let row = &mut acc[i * n..(i + 1) * n];
                for j in 0..n {
                    row[j] += xi_ * x[j];
                }
            }
        }
    }
    let inv = 1.0 / cfg.samples() as f64;
    acc.iter_mut().for_each(|v| *v *= inv);
    Ok(acc)
}

fn average(per_traj: &[Vec<f64>], n: usize, picks: impl Iterator<Item = usize>) -> DMatrix<f64> {
    let mut sum = vec![0.0; n * n];
    let mut count = 0usize;
    for p in picks {
        for (s, v) in sum.iter_mut().zip(&per_traj[p]) {
            *s += v;
        }
        count += 1;
    }
    let m = DMatrix::from_row_slice(n, n, &sum) / count as f64;
    (&m + m.transpose()) * 0.5
}

fn bootstrap_stderr(per_traj: &[Vec<f64>], n: usize, mean: &DMatrix<f64>, seed: u64) -> f64 {
    let count = per_traj.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut sq = 0.0;
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let picks: Vec<usize> = (0..count).map(|_| rng.random_range(0..count)).collect();
        let resampled = average(per_traj, n, picks.into_iter());
        sq += (resampled - mean).norm_squared();
    }
    (sq / BOOTSTRAP_RESAMPLES as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_noise_factor() {
        let r = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 9.0, 0.25]));
        let b = noise_factor(&r).unwrap();
        assert!((&b * b.transpose() - &r).norm() < 1e-14);
        let mut diag: Vec<f64> = b.iter().map(|v| v.abs()).filter(|v| *v > 1e-14).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(diag, vec![0.5, 2.0, 3.0]);
    }

    #[test]
    fn identity_noise_factor() {
        let b = noise_factor(&DMatrix::identity(8, 8)).unwrap();
        assert!((&b * b.transpose() - DMatrix::<f64>::identity(8, 8)).norm() < 1e-14);
    }

    #[test]
    fn indefinite_noise_is_rejected() {
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(noise_factor(&r), Err(Error::NotPositiveSemidefinite { .. })));
    }

    #[test]
    fn config_invariants() {
        let k = DMatrix::from_element(1, 1, -1.0);
        let mut cfg = OracleConfig::for_drift(&k, 1000, 100, 1).unwrap();
        assert!((cfg.dt - 0.05).abs() < 1e-15);
        cfg.validate(&k).unwrap();
        cfg.n_trajectories = 99;
        assert!(cfg.validate(&k).is_err());
        cfg.n_trajectories = 100;
        cfg.dt = 0.2;
        assert!(cfg.validate(&k).is_err());
    }

    #[test]
    fn two_dimensional_scalar_drift() {
        let a = 2.0;
        let k = DMatrix::identity(2, 2) * -a;
        let b = DMatrix::identity(2, 2);
        let cfg = OracleConfig::for_drift(&k, 20_000, 100, 11).unwrap();
        let est = simulate_covariance(&k, &b, &cfg).unwrap();
        let exact = DMatrix::identity(2, 2) / (2.0 * a);
        let dev = (&est.estimate - exact).norm();
        assert!(dev < 4.0 * est.stderr + 0.03 * 0.25, "dev {dev}, stderr {}", est.stderr);
    }
}
