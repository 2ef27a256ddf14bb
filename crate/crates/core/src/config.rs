//! JSON configuration: physical parameters, an optional sweep specification
//! and optional Monte Carlo settings.
//!
//! Every section and every field may be omitted; missing values fall back to
//! [`SystemParams::reference`]. Rates are `{value, unit, times_two_pi}`
//! objects, dimensionless ratios are bare numbers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::{Bath, CavityParams, DriveSpec, GainMediumParams, MechanicalParams, SystemParams};
use crate::sweep::SweepSpec;
use crate::units::{Quantity, Unit};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_gain: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atomic_decay: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_over_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_strength: Option<Quantity>,
    /// Atomic injection rate r₀; with `atom_field_coupling` replaces `linear_gain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection_rate: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_field_coupling: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub power_w: f64,
    pub drive_frequency: Quantity,
    pub cavity_frequency: Quantity,
    pub length_m: f64,
    pub mass_kg: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_over_wm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_th: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_n_trajectories")]
    pub n_trajectories: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    /// Time step in seconds; defaults to 0.05/max|eig(𝒦)|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn default_n_steps() -> usize {
    200_000
}

fn default_n_trajectories() -> usize {
    200
}

fn default_burn_in() -> f64 {
    0.5
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            n_steps: default_n_steps(),
            n_trajectories: default_n_trajectories(),
            burn_in_fraction: default_burn_in(),
            seed: 0,
            dt: None,
        }
    }
}

/// The configuration document as written on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub gain: GainSection,
    #[serde(default)]
    pub cavity_1: CavitySection,
    #[serde(default)]
    pub cavity_2: CavitySection,
    #[serde(default)]
    pub mirror_1: MirrorSection,
    #[serde(default)]
    pub mirror_2: MirrorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub sweep: Option<SweepSpec>,
    pub oracle: OracleSection,
    /// The document with every default filled in, so each rate carries its
    /// unit and `times_two_pi` flag explicitly.
    pub resolved: ConfigFile,
}

pub const DEFAULT_KAPPA: Quantity = Quantity::two_pi(215.0, Unit::KHz);
pub const DEFAULT_OMEGA_M: Quantity = Quantity::two_pi(947.0, Unit::KHz);
pub const DEFAULT_GAMMA_M: Quantity = Quantity::two_pi(140.0, Unit::Hz);
pub const DEFAULT_LINEAR_GAIN: Quantity = Quantity::bare(250.0, Unit::MHz);
pub const DEFAULT_ATOMIC_DECAY: Quantity = Quantity::bare(1.7, Unit::MHz);
pub const DEFAULT_OMEGA_OVER_GAMMA: f64 = 6.0;
pub const DEFAULT_G_OVER_WM: f64 = 0.25;
pub const DEFAULT_N_TH: [f64; 2] = [15.0, 5.0];

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::config(json_key_hint(&e), e.to_string()))?;
    resolve(file)
}

fn json_key_hint(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    // serde reports unknown fields as "unknown field `name`"
    msg.split('`').nth(1).map(str::to_string).unwrap_or_else(|| "<document>".into())
}

fn finite_ratio(key: &str, v: f64) -> Result<f64> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::config(key, format!("must be a finite number >= 0, got {v}")));
    }
    Ok(v)
}

pub fn resolve(file: ConfigFile) -> Result<Config> {
    let mut resolved = file.clone();

    let g = &mut resolved.gain;
    let atomic_decay_q = *g.atomic_decay.get_or_insert(DEFAULT_ATOMIC_DECAY);
    let atomic_decay = atomic_decay_q.to_rad_per_s("gain.atomic_decay")?;

    let microscopic = (g.injection_rate, g.atom_field_coupling);
    let linear_gain = match (g.linear_gain, microscopic) {
        (Some(_), (Some(_), _) | (_, Some(_))) => {
            return Err(Error::config(
                "gain.linear_gain",
                "give either linear_gain or injection_rate with atom_field_coupling, not both",
            ));
        }
        (None, (Some(r0), Some(coupling))) => {
            let r0 = r0.to_rad_per_s("gain.injection_rate")?;
            let coupling = coupling.to_rad_per_s("gain.atom_field_coupling")?;
            GainMediumParams::from_microscopic(r0, coupling, atomic_decay, 0.0)?.linear_gain
        }
        (None, (Some(_), None)) => return Err(Error::config("gain.atom_field_coupling", "required with injection_rate")),
        (None, (None, Some(_))) => return Err(Error::config("gain.injection_rate", "required with atom_field_coupling")),
        (linear, (None, None)) => g
            .linear_gain
            .get_or_insert(linear.unwrap_or(DEFAULT_LINEAR_GAIN))
            .to_rad_per_s("gain.linear_gain")?,
    };

    let drive_strength = match (g.omega_over_gamma, g.drive_strength) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "gain.omega_over_gamma",
                "give either omega_over_gamma or drive_strength, not both",
            ));
        }
        (None, Some(q)) => q.to_rad_per_s("gain.drive_strength")?,
        (ratio, None) => {
            let ratio = finite_ratio("gain.omega_over_gamma", *g.omega_over_gamma.get_or_insert(ratio.unwrap_or(DEFAULT_OMEGA_OVER_GAMMA)))?;
            ratio * atomic_decay
        }
    };
    let gain = GainMediumParams {
        linear_gain,
        atomic_decay,
        drive_strength,
    };
    gain.validate().map_err(|e| Error::config("gain", e.to_string()))?;

    let mirror_1 = resolve_mirror("mirror_1", &mut resolved.mirror_1, DEFAULT_N_TH[0])?;
    let mirror_2 = resolve_mirror("mirror_2", &mut resolved.mirror_2, DEFAULT_N_TH[1])?;
    let cavity_1 = resolve_cavity("cavity_1", &mut resolved.cavity_1, &mirror_1)?;
    let cavity_2 = resolve_cavity("cavity_2", &mut resolved.cavity_2, &mirror_2)?;

    let params = SystemParams {
        gain,
        cavity_1,
        cavity_2,
        mirror_1,
        mirror_2,
    };
    params.validate()?;

    if let Some(sweep) = &resolved.sweep {
        sweep.validate()?;
    }
    let oracle = resolved.oracle.clone().unwrap_or_default();
    if !(oracle.burn_in_fraction > 0.0 && oracle.burn_in_fraction < 1.0) {
        return Err(Error::config("oracle.burn_in_fraction", "must lie in (0, 1)"));
    }
    if oracle.n_trajectories < 100 {
        return Err(Error::config("oracle.n_trajectories", "at least 100 trajectories are required"));
    }
    if let Some(dt) = oracle.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("oracle.dt", "must be positive and finite"));
        }
    }

    Ok(Config {
        params,
        sweep: resolved.sweep.clone(),
        oracle,
        resolved,
    })
}

fn resolve_mirror(prefix: &str, m: &mut MirrorSection, default_n: f64) -> Result<MechanicalParams> {
    let omega_m = m.omega_m.get_or_insert(DEFAULT_OMEGA_M).to_rad_per_s(&format!("{prefix}.omega_m"))?;
    let gamma_m = m.gamma_m.get_or_insert(DEFAULT_GAMMA_M).to_rad_per_s(&format!("{prefix}.gamma_m"))?;
    let bath = match (m.n_th, m.temperature) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                format!("{prefix}.temperature"),
                "n_th and temperature are mutually exclusive",
            ));
        }
        (None, Some(t)) => {
            let t = t.to_kelvin(&format!("{prefix}.temperature"))?;
            if !(t > 0.0) {
                return Err(Error::config(format!("{prefix}.temperature"), "must be > 0"));
            }
            Bath::Temperature(t)
        }
        (n, None) => {
            let n = *m.n_th.get_or_insert(n.unwrap_or(default_n));
            Bath::Occupation(finite_ratio(&format!("{prefix}.n_th"), n)?)
        }
    };
    let mirror = MechanicalParams {
        omega_m,
        gamma_m,
        bath,
    };
    mirror.validate(prefix).map_err(|e| Error::config(prefix, e.to_string()))?;
    Ok(mirror)
}

fn resolve_cavity(prefix: &str, c: &mut CavitySection, mirror: &MechanicalParams) -> Result<CavityParams> {
    let kappa = c.kappa.get_or_insert(DEFAULT_KAPPA).to_rad_per_s(&format!("{prefix}.kappa"))?;
    let drive = match &c.drive {
        Some(d) => {
            let spec = DriveSpec {
                power: d.power_w,
                drive_frequency: d.drive_frequency.to_rad_per_s(&format!("{prefix}.drive.drive_frequency"))?,
                cavity_frequency: d.cavity_frequency.to_rad_per_s(&format!("{prefix}.drive.cavity_frequency"))?,
                cavity_length: d.length_m,
                mirror_mass: d.mass_kg,
            };
            spec.validate(&format!("{prefix}.drive"))?;
            Some(spec)
        }
        None => None,
    };
    if drive.is_none() && c.g_over_wm.is_none() {
        c.g_over_wm = Some(DEFAULT_G_OVER_WM);
    }
    let effective_coupling = match c.g_over_wm {
        Some(r) => Some(finite_ratio(&format!("{prefix}.g_over_wm"), r)? * mirror.omega_m),
        None => None,
    };
    let cavity = CavityParams {
        kappa,
        effective_coupling,
        drive,
    };
    cavity.validate(prefix)?;
    Ok(cavity)
}

impl Config {
    /// Configuration with every default.
    pub fn reference() -> Self {
        resolve(ConfigFile::default()).expect("reference configuration is valid")
    }

    /// Single-line JSON of the resolved document, for output metadata.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string(&self.resolved).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg.params, SystemParams::reference());
        assert!(cfg.sweep.is_none());
        assert_eq!(cfg.resolved.cavity_1.kappa, Some(DEFAULT_KAPPA));
        assert_eq!(cfg.resolved.gain.linear_gain, Some(DEFAULT_LINEAR_GAIN));
    }

    #[test]
    fn both_bath_specs_rejected() {
        let err = parse_config(r#"{"mirror_1": {"n_th": 3, "temperature": {"value": 0.7, "unit": "mK"}}}"#).unwrap_err();
        assert!(err.to_string().contains("mirror_1.temperature"), "{err}");
    }

    #[test]
    fn temperature_path() {
        let cfg = parse_config(r#"{"mirror_1": {"temperature": {"value": 0.7, "unit": "mK"}}}"#).unwrap();
        let n = cfg.params.mirror_1.n_th().unwrap();
        assert!((n - 14.907_346_198_572_35).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(r#"{"cavity_1": {"kapa": {"value": 1, "unit": "Hz"}}}"#).unwrap_err();
        assert!(err.to_string().contains("kapa"), "{err}");
    }

    #[test]
    fn wrong_unit_names_key() {
        let err = parse_config(r#"{"cavity_2": {"kappa": {"value": 1, "unit": "mK"}}}"#).unwrap_err();
        assert!(err.to_string().contains("cavity_2.kappa"), "{err}");
    }

    #[test]
    fn microscopic_gain() {
        let cfg = parse_config(
            r#"{"gain": {"injection_rate": {"value": 1.6, "unit": "MHz"},
                         "atom_field_coupling": {"value": 1.0, "unit": "MHz"},
                         "omega_over_gamma": 0}}"#,
        )
        .unwrap();
        let expected = 2.0 * 1.6e6 * 1e12 / (1.7e6 * 1.7e6);
        assert!((cfg.params.gain.linear_gain - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn conflicting_drive_inputs() {
        assert!(parse_config(r#"{"gain": {"omega_over_gamma": 1, "drive_strength": {"value": 1, "unit": "MHz"}}}"#).is_err());
    }

    #[test]
    fn negative_ratio_rejected() {
        let err = parse_config(r#"{"cavity_1": {"g_over_wm": -0.1}}"#).unwrap_err();
        assert!(err.to_string().contains("cavity_1.g_over_wm"), "{err}");
    }
}
