//! Steady-state fluctuations of two optomechanical mirrors coupled through a
//! correlated-emission laser, and Gaussian EPR steering between them.
//!
//! The pipeline at a parameter point is
//! [`gain::compute_xi`] → [`dynamics::build_drift`] / [`dynamics::build_diffusion`]
//! → [`dynamics::solve_lyapunov`] → [`steering::mech_block`] → steering measures.
//! [`sweep`] runs it over grids, [`oracle`] cross-checks the steady state by
//! stochastic integration.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod gain;
pub mod oracle;
pub mod steering;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
