use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("near-singular cavity denominator (|d| = {magnitude:e}, drive amplitude {epsilon:e})")]
    SingularCavity { magnitude: f64, epsilon: f64 },

    #[error("drift matrix is not Hurwitz-stable (max real eigenvalue {max_real_eig:e}); no steady state")]
    Unstable { max_real_eig: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenNonConvergence,

    #[error("lyapunov solve failed: {0}")]
    Lyapunov(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("non-positive covariance determinant {det:e}")]
    NonPositiveDeterminant { det: f64 },

    #[error("steering-party block is singular (det = {det:e})")]
    SingularBlock { det: f64 },

    #[error("trajectory {trajectory} diverged at step {step} (|x| = {norm:e})")]
    TrajectoryDiverged { trajectory: usize, step: usize, norm: f64 },

    #[error("{coords}: {source}")]
    AtPoint {
        coords: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Attaches grid coordinates to an error raised while evaluating a sweep point.
    pub fn at_point(self, coords: impl Into<String>) -> Self {
        Error::AtPoint {
            coords: coords.into(),
            source: Box::new(self),
        }
    }

    /// Strips any point annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            other => other,
        }
    }
}
