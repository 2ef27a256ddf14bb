//! Physical constants and the `{value, unit, times_two_pi}` quantity used by
//! configuration files.
//!
//! Every rate is stored internally as an angular rate in rad/s. Whether a
//! configured number carries the `2π` prefix is an explicit per-entry flag;
//! nothing is inferred from the unit name.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s), exact SI 2019.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K), exact SI 2019.
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "Hz")]
    Hz,
    #[serde(rename = "kHz")]
    KHz,
    #[serde(rename = "MHz")]
    MHz,
    #[serde(rename = "mK")]
    MilliKelvin,
    #[serde(rename = "K")]
    Kelvin,
    #[serde(rename = "dimensionless")]
    Dimensionless,
}

impl Unit {
    fn rate_scale(self) -> Option<f64> {
        match self {
            Unit::Hz => Some(1.0),
            Unit::KHz => Some(1e3),
            Unit::MHz => Some(1e6),
            _ => None,
        }
    }

    fn temperature_scale(self) -> Option<f64> {
        match self {
            Unit::MilliKelvin => Some(1e-3),
            Unit::Kelvin => Some(1.0),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Hz => "Hz",
            Unit::KHz => "kHz",
            Unit::MHz => "MHz",
            Unit::MilliKelvin => "mK",
            Unit::Kelvin => "K",
            Unit::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// A configured physical quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
    #[serde(default)]
    pub times_two_pi: bool,
}

impl Quantity {
    pub const fn new(value: f64, unit: Unit, times_two_pi: bool) -> Self {
        Quantity {
            value,
            unit,
            times_two_pi,
        }
    }

    /// `2π × value unit`.
    pub const fn two_pi(value: f64, unit: Unit) -> Self {
        Self::new(value, unit, true)
    }

    /// `value unit` taken as an angular rate without a `2π` factor.
    pub const fn bare(value: f64, unit: Unit) -> Self {
        Self::new(value, unit, false)
    }

    /// Angular rate in rad/s. `key` names the entry in error messages.
    pub fn to_rad_per_s(&self, key: &str) -> Result<f64> {
        let scale = self.unit.rate_scale().ok_or_else(|| {
            Error::config(key, format!("expected a rate unit (Hz, kHz, MHz), got {}", self.unit))
        })?;
        if !self.value.is_finite() {
            return Err(Error::config(key, "value must be finite"));
        }
        let factor = if self.times_two_pi { 2.0 * PI } else { 1.0 };
        Ok(self.value * scale * factor)
    }

    /// Temperature in kelvin.
    pub fn to_kelvin(&self, key: &str) -> Result<f64> {
        let scale = self.unit.temperature_scale().ok_or_else(|| {
            Error::config(key, format!("expected a temperature unit (mK, K), got {}", self.unit))
        })?;
        if self.times_two_pi {
            return Err(Error::config(key, "times_two_pi is meaningless for a temperature"));
        }
        if !self.value.is_finite() {
            return Err(Error::config(key, "value must be finite"));
        }
        Ok(self.value * scale)
    }
}
