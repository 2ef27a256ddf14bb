//! Scalar quantities of the model: correlated-emission gain rates, thermal
//! occupations, steady cavity amplitudes and effective optomechanical
//! couplings. All rates are angular (rad/s).

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{HBAR, K_B};

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    finite(name, v)?;
    if v < 0.0 {
        return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
    }
    Ok(v)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    finite(name, v)?;
    if v <= 0.0 {
        return Err(Error::invalid(name, format!("must be > 0, got {v}")));
    }
    Ok(v)
}

/// Gain medium of the two-mode laser: cascade three-level atoms with a
/// driven upper/lower coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMediumParams {
    /// Linear gain coefficient 𝒜.
    pub linear_gain: f64,
    /// Atomic spontaneous decay γ (identical for both transitions).
    pub atomic_decay: f64,
    /// Strength Ω of the field driving the |1⟩ ↔ |3⟩ coherence.
    pub drive_strength: f64,
}

impl GainMediumParams {
    pub fn new(linear_gain: f64, atomic_decay: f64, drive_strength: f64) -> Result<Self> {
        let p = GainMediumParams {
            linear_gain,
            atomic_decay,
            drive_strength,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the gain from the atomic injection rate r₀ and atom–field
    /// coupling ς via 𝒜 = 2r₀ς²/γ².
    pub fn from_microscopic(
        injection_rate: f64,
        atom_field_coupling: f64,
        atomic_decay: f64,
        drive_strength: f64,
    ) -> Result<Self> {
        non_negative("injection_rate", injection_rate)?;
        finite("atom_field_coupling", atom_field_coupling)?;
        positive("atomic_decay", atomic_decay)?;
        let linear_gain = 2.0 * injection_rate * atom_field_coupling.powi(2) / atomic_decay.powi(2);
        Self::new(linear_gain, atomic_decay, drive_strength)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("gain.linear_gain", self.linear_gain)?;
        positive("gain.atomic_decay", self.atomic_decay)?;
        non_negative("gain.drive_strength", self.drive_strength)?;
        Ok(())
    }

    pub fn omega_over_gamma(&self) -> f64 {
        self.drive_strength / self.atomic_decay
    }

    pub fn with_omega_over_gamma(mut self, ratio: f64) -> Self {
        self.drive_strength = ratio * self.atomic_decay;
        self
    }
}

/// The four rates Ξ₁₁, Ξ₂₂, Ξ₁₂, Ξ₂₁ of the reduced two-mode laser master
/// equation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct XiCoefficients {
    /// Gain of laser mode 1.
    pub xi11: f64,
    /// Loss of laser mode 2.
    pub xi22: f64,
    pub xi12: f64,
    pub xi21: f64,
}

/// Closed-form gain-medium rates.
pub fn compute_xi(gain: &GainMediumParams) -> Result<XiCoefficients> {
    gain.validate()?;
    let a = gain.linear_gain;
    let g = gain.atomic_decay;
    let w = gain.drive_strength;
    let (g2, w2) = (g * g, w * w);
    let d1 = w2 + g2;
    let d2 = w2 / 4.0 + g2;
    Ok(XiCoefficients {
        xi11: 3.0 * a / 8.0 * w2 * g2 / (d1 * d2),
        xi22: a / 2.0 * g2 / d1,
        xi12: -a / 2.0 * w * g / d1,
        // factored so the sign change lands exactly on Ω = √2·γ in floating point
        xi21: a / 8.0 * w * g * ((w - SQRT_2 * g) * (w + SQRT_2 * g)) / (d1 * d2),
    })
}

/// Bose–Einstein occupation of a mode at `omega` (rad/s) and temperature `t` (K).
pub fn thermal_occupation(omega: f64, t: f64) -> Result<f64> {
    positive("omega_m", omega)?;
    positive("temperature", t)?;
    let x = HBAR * omega / (K_B * t);
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Inverse of [`thermal_occupation`]: the temperature giving occupation `n`.
pub fn temperature_for(n: f64, omega: f64) -> Result<f64> {
    positive("n_th", n)?;
    positive("omega_m", omega)?;
    Ok(HBAR * omega / (K_B * (1.0 / n).ln_1p()))
}

/// Steady intracavity amplitude ⟨c̃ⱼ⟩ = ε / (κ + iΔ′ + ξ), where `xi_signed`
/// is (−1)ʲΞⱼⱼ: −Ξ₁₁ for cavity 1, +Ξ₂₂ for cavity 2.
pub fn cavity_steady_amplitude(
    epsilon: f64,
    kappa: f64,
    delta_prime: f64,
    xi_signed: f64,
) -> Result<Complex64> {
    finite("epsilon", epsilon)?;
    finite("kappa", kappa)?;
    finite("delta_prime", delta_prime)?;
    finite("xi_signed", xi_signed)?;
    let denom = Complex64::new(kappa + xi_signed, delta_prime);
    let magnitude = denom.norm();
    if magnitude < 1e-12 * epsilon.abs() || magnitude == 0.0 {
        return Err(Error::SingularCavity { magnitude, epsilon });
    }
    Ok(Complex64::new(epsilon, 0.0) / denom)
}

/// Physical drive of one cavity, from which the many-photon coupling G is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    /// Input laser power ℘ (W).
    pub power: f64,
    /// Drive laser angular frequency ω_L (rad/s).
    pub drive_frequency: f64,
    /// Cavity angular frequency ν (rad/s).
    pub cavity_frequency: f64,
    /// Equilibrium cavity length l (m).
    pub cavity_length: f64,
    /// Effective mirror mass μ (kg).
    pub mirror_mass: f64,
}

impl DriveSpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        non_negative(&format!("{prefix}.power"), self.power)?;
        positive(&format!("{prefix}.drive_frequency"), self.drive_frequency)?;
        positive(&format!("{prefix}.cavity_frequency"), self.cavity_frequency)?;
        positive(&format!("{prefix}.cavity_length"), self.cavity_length)?;
        positive(&format!("{prefix}.mirror_mass"), self.mirror_mass)?;
        Ok(())
    }

    /// Drive amplitude ε = √(2κ℘/ħω_L).
    pub fn amplitude(&self, kappa: f64) -> f64 {
        (2.0 * kappa * self.power / (HBAR * self.drive_frequency)).sqrt()
    }
}

/// Single-photon optomechanical coupling g = (ν/l)√(ħ/μω_m).
pub fn single_photon_coupling(cavity_frequency: f64, cavity_length: f64, mirror_mass: f64, omega_m: f64) -> f64 {
    cavity_frequency / cavity_length * (HBAR / (mirror_mass * omega_m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub kappa: f64,
    /// Effective coupling G (rad/s) given directly.
    pub effective_coupling: Option<f64>,
    pub drive: Option<DriveSpec>,
}

impl CavityParams {
    pub fn with_coupling(kappa: f64, g: f64) -> Self {
        CavityParams {
            kappa,
            effective_coupling: Some(g),
            drive: None,
        }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        positive(&format!("{prefix}.kappa"), self.kappa)?;
        if let Some(g) = self.effective_coupling {
            non_negative(&format!("{prefix}.effective_coupling"), g)?;
        }
        if let Some(d) = &self.drive {
            d.validate(&format!("{prefix}.drive"))?;
        }
        if self.effective_coupling.is_none() && self.drive.is_none() {
            return Err(Error::config(
                prefix,
                "either an effective coupling or a full drive specification is required",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bath {
    /// Mean thermal phonon number.
    Occupation(f64),
    /// Bath temperature (K).
    Temperature(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub bath: Bath,
}

impl MechanicalParams {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        positive(&format!("{prefix}.omega_m"), self.omega_m)?;
        positive(&format!("{prefix}.gamma_m"), self.gamma_m)?;
        match self.bath {
            Bath::Occupation(n) => {
                non_negative(&format!("{prefix}.n_th"), n)?;
            }
            Bath::Temperature(t) => {
                positive(&format!("{prefix}.temperature"), t)?;
            }
        }
        if self.quality_factor() <= 100.0 {
            log::warn!(
                "{prefix}: mechanical quality factor {:.1} <= 100, Markovian bath treatment is questionable",
                self.quality_factor()
            );
        }
        Ok(())
    }

    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    pub fn n_th(&self) -> Result<f64> {
        match self.bath {
            Bath::Occupation(n) => non_negative("n_th", n),
            Bath::Temperature(t) => thermal_occupation(self.omega_m, t),
        }
    }
}

/// Effective many-photon coupling Gⱼ = gⱼ|⟨c̃ⱼ⟩| for cavity `index` (1 or 2).
///
/// A directly given coupling wins over a drive specification. The drive path
/// evaluates the steady amplitude at the anti-Stokes point Δ′ⱼ = +ω_{mⱼ}.
pub fn effective_coupling(
    cavity: &CavityParams,
    mirror: &MechanicalParams,
    xi: &XiCoefficients,
    index: u8,
) -> Result<f64> {
    let xi_signed = match index {
        1 => -xi.xi11,
        2 => xi.xi22,
        other => return Err(Error::invalid("index", format!("cavity index must be 1 or 2, got {other}"))),
    };
    if let Some(g) = cavity.effective_coupling {
        if cavity.drive.is_some() {
            log::warn!("cavity_{index}: both a direct coupling and a drive are given; using the direct coupling");
        }
        return non_negative("effective_coupling", g);
    }
    let drive = cavity.drive.ok_or_else(|| {
        Error::config(
            format!("cavity_{index}"),
            "no effective coupling and no drive specification",
        )
    })?;
    drive.validate(&format!("cavity_{index}.drive"))?;
    let epsilon = drive.amplitude(cavity.kappa);
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    let amp = cavity_steady_amplitude(epsilon, cavity.kappa, mirror.omega_m, xi_signed)?;
    let g0 = single_photon_coupling(drive.cavity_frequency, drive.cavity_length, drive.mirror_mass, mirror.omega_m);
    Ok(g0 * amp.norm())
}

/// All physical inputs of the two-mirror system.
///
/// Both cavities are driven on the anti-Stokes sideband (Δ′ⱼ = +ω_{mⱼ}); the
/// detuning is a model constant rather than a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub gain: GainMediumParams,
    pub cavity_1: CavityParams,
    pub cavity_2: CavityParams,
    pub mirror_1: MechanicalParams,
    pub mirror_2: MechanicalParams,
}

impl SystemParams {
    /// Reference operating point: κ = 2π×215 kHz, γ_m = 2π×140 Hz,
    /// ω_m = 2π×947 kHz, 𝒜 = 250 MHz, γ = 1.7 MHz (both without a 2π factor),
    /// G₁,₂ = 0.25 ω_m, n_th = (15, 5), Ω/γ = 6.
    pub fn reference() -> Self {
        let kappa = 2.0 * PI * 215e3;
        let omega_m = 2.0 * PI * 947e3;
        let gamma_m = 2.0 * PI * 140.0;
        let gamma = 1.7e6;
        let mirror = |n| MechanicalParams {
            omega_m,
            gamma_m,
            bath: Bath::Occupation(n),
        };
        SystemParams {
            gain: GainMediumParams {
                linear_gain: 250e6,
                atomic_decay: gamma,
                drive_strength: 6.0 * gamma,
            },
            cavity_1: CavityParams::with_coupling(kappa, 0.25 * omega_m),
            cavity_2: CavityParams::with_coupling(kappa, 0.25 * omega_m),
            mirror_1: mirror(15.0),
            mirror_2: mirror(5.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gain.validate()?;
        self.cavity_1.validate("cavity_1")?;
        self.cavity_2.validate("cavity_2")?;
        self.mirror_1.validate("mirror_1")?;
        self.mirror_2.validate("mirror_2")?;
        Ok(())
    }

    /// Effective couplings (G₁, G₂).
    pub fn couplings(&self, xi: &XiCoefficients) -> Result<(f64, f64)> {
        Ok((
            effective_coupling(&self.cavity_1, &self.mirror_1, xi, 1)?,
            effective_coupling(&self.cavity_2, &self.mirror_2, xi, 2)?,
        ))
    }

    /// Thermal occupations (n₁, n₂).
    pub fn occupations(&self) -> Result<(f64, f64)> {
        Ok((self.mirror_1.n_th()?, self.mirror_2.n_th()?))
    }

    pub fn set_omega_over_gamma(&mut self, ratio: f64) {
        self.gain = self.gain.with_omega_over_gamma(ratio);
    }

    /// Sets Gⱼ = ratio·ω_{mⱼ} on cavity `index`, dropping any drive specification.
    pub fn set_g_over_wm(&mut self, index: u8, ratio: f64) {
        let (cavity, mirror) = match index {
            1 => (&mut self.cavity_1, &self.mirror_1),
            _ => (&mut self.cavity_2, &self.mirror_2),
        };
        cavity.effective_coupling = Some(ratio * mirror.omega_m);
        cavity.drive = None;
    }

    pub fn set_n_th(&mut self, index: u8, n: f64) {
        let mirror = match index {
            1 => &mut self.mirror_1,
            _ => &mut self.mirror_2,
        };
        mirror.bath = Bath::Occupation(n);
    }
}
