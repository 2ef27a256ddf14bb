//! Single-point evaluation, grid sweeps, stability maps and CSV output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_diffusion, build_drift, lyapunov_residual, solve_continuous_lyapunov, CovarianceMatrix, DiffusionMatrix,
    DriftMatrix, StabilityReport, Verdict,
};
use crate::error::{Error, Result};
use crate::gain::{compute_xi, SystemParams};
use crate::steering::{classify, mech_block, mech_energies, mech_energy_diff, steering_det, Direction, Regime};

/// Parameters that may be placed on a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ParameterPath {
    OmegaOverGamma,
    NTh1,
    NTh2,
    /// Both occupations locked together.
    NTh,
    GOverWm1,
    GOverWm2,
    /// Both couplings locked together.
    GOverWm,
}

impl ParameterPath {
    pub const ALL: [ParameterPath; 7] = [
        ParameterPath::OmegaOverGamma,
        ParameterPath::NTh1,
        ParameterPath::NTh2,
        ParameterPath::NTh,
        ParameterPath::GOverWm1,
        ParameterPath::GOverWm2,
        ParameterPath::GOverWm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParameterPath::OmegaOverGamma => "gain.omega_over_gamma",
            ParameterPath::NTh1 => "mirror_1.n_th",
            ParameterPath::NTh2 => "mirror_2.n_th",
            ParameterPath::NTh => "n_th",
            ParameterPath::GOverWm1 => "cavity_1.g_over_wm",
            ParameterPath::GOverWm2 => "cavity_2.g_over_wm",
            ParameterPath::GOverWm => "g_over_wm",
        }
    }

    pub fn apply(self, params: &mut SystemParams, value: f64) {
        match self {
            ParameterPath::OmegaOverGamma => params.set_omega_over_gamma(value),
            ParameterPath::NTh1 => params.set_n_th(1, value),
            ParameterPath::NTh2 => params.set_n_th(2, value),
            ParameterPath::NTh => {
                params.set_n_th(1, value);
                params.set_n_th(2, value);
            }
            ParameterPath::GOverWm1 => params.set_g_over_wm(1, value),
            ParameterPath::GOverWm2 => params.set_g_over_wm(2, value),
            ParameterPath::GOverWm => {
                params.set_g_over_wm(1, value);
                params.set_g_over_wm(2, value);
            }
        }
    }
}

impl fmt::Display for ParameterPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParameterPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParameterPath::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ParameterPath::ALL.iter().map(|p| p.as_str()).collect();
                Error::config("sweep.parameter", format!("`{s}` is not sweepable; expected one of {}", names.join(", ")))
            })
    }
}

impl TryFrom<String> for ParameterPath {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ParameterPath> for String {
    fn from(p: ParameterPath) -> String {
        p.as_str().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: ParameterPath,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn linear(parameter: ParameterPath, min: f64, max: f64, n_points: usize) -> Self {
        Axis {
            parameter,
            min,
            max,
            n_points,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::config(format!("{key}.n_points"), "at least 2 points per axis"));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::config(key, "bounds must be finite"));
        }
        if self.min < 0.0 {
            return Err(Error::config(format!("{key}.min"), "swept ratios and occupations are non-negative"));
        }
        if self.max < self.min {
            return Err(Error::config(format!("{key}.max"), "must be >= min"));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(Error::config(format!("{key}.min"), "log axes need min > 0"));
        }
        Ok(())
    }

    /// Grid values; the end points are exactly `min` and `max`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * t,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputColumn {
    #[serde(rename = "steering_1to2")]
    Steering1To2,
    #[serde(rename = "steering_2to1")]
    Steering2To1,
    Regime,
    EnergyDiff,
    MaxRealEig,
    HurwitzMin,
    LyapunovResidual,
}

impl OutputColumn {
    pub const ALL: [OutputColumn; 7] = [
        OutputColumn::Steering1To2,
        OutputColumn::Steering2To1,
        OutputColumn::Regime,
        OutputColumn::EnergyDiff,
        OutputColumn::MaxRealEig,
        OutputColumn::HurwitzMin,
        OutputColumn::LyapunovResidual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutputColumn::Steering1To2 => "steering_1to2",
            OutputColumn::Steering2To1 => "steering_2to1",
            OutputColumn::Regime => "regime",
            OutputColumn::EnergyDiff => "energy_diff",
            OutputColumn::MaxRealEig => "max_real_eig",
            OutputColumn::HurwitzMin => "hurwitz_min",
            OutputColumn::LyapunovResidual => "lyapunov_residual",
        }
    }
}

fn all_outputs() -> Vec<OutputColumn> {
    OutputColumn::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    #[serde(default = "all_outputs")]
    pub outputs: Vec<OutputColumn>,
}

impl SweepSpec {
    pub fn one_d(axis1: Axis) -> Self {
        SweepSpec {
            axis1,
            axis2: None,
            outputs: all_outputs(),
        }
    }

    pub fn two_d(axis1: Axis, axis2: Axis) -> Self {
        SweepSpec {
            axis1,
            axis2: Some(axis2),
            outputs: all_outputs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate("sweep.axis1")?;
        if let Some(a2) = &self.axis2 {
            a2.validate("sweep.axis2")?;
            if a2.parameter == self.axis1.parameter {
                return Err(Error::config("sweep.axis2.parameter", "must differ from axis1"));
            }
        }
        for (i, c) in self.outputs.iter().enumerate() {
            if self.outputs[..i].contains(c) {
                return Err(Error::config("sweep.outputs", format!("duplicate column {}", c.as_str())));
            }
        }
        Ok(())
    }

    pub fn axes(&self) -> Vec<&Axis> {
        std::iter::once(&self.axis1).chain(self.axis2.as_ref()).collect()
    }

    /// Grid coordinates in row-major order over (axis1, axis2).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let v1 = self.axis1.values();
        match &self.axis2 {
            None => v1.into_iter().map(|x| vec![x]).collect(),
            Some(a2) => {
                let v2 = a2.values();
                v1.iter().flat_map(|&x| v2.iter().map(move |&y| vec![x, y])).collect()
            }
        }
    }

    /// Parameters at one grid point.
    pub fn params_at(&self, base: &SystemParams, coords: &[f64]) -> SystemParams {
        let mut p = *base;
        for (axis, &v) in self.axes().into_iter().zip(coords) {
            axis.parameter.apply(&mut p, v);
        }
        p
    }

    fn describe(&self, coords: &[f64]) -> String {
        self.axes()
            .iter()
            .zip(coords)
            .map(|(a, v)| format!("{}={v}", a.parameter))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Unstable,
    Marginal,
    RNotPsd,
    /// A component failed; the message is logged.
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unstable => "unstable",
            Status::Marginal => "marginal",
            Status::RNotPsd => "r_not_psd",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result at one grid point. Steering fields are `None` unless `status` is ok.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub stable: bool,
    pub status: Status,
    pub steering_1to2: Option<f64>,
    pub steering_2to1: Option<f64>,
    pub regime: Option<Regime>,
    /// ℰ₁ − ℰ₂: in units of ħω_m/2 for equal mirror frequencies, in joules
    /// otherwise (see `energy_in_joules`).
    pub energy_diff: Option<f64>,
    pub energy_in_joules: bool,
    pub max_real_eig: f64,
    pub hurwitz_min: f64,
    pub lyapunov_residual: Option<f64>,
    pub covariance: Option<CovarianceMatrix>,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(coords: Vec<f64>) -> Self {
        SweepRow {
            coords,
            stable: false,
            status: Status::Error,
            steering_1to2: None,
            steering_2to1: None,
            regime: None,
            energy_diff: None,
            energy_in_joules: false,
            max_real_eig: f64::NAN,
            hurwitz_min: f64::NAN,
            lyapunov_residual: None,
            covariance: None,
            error: None,
        }
    }
}

/// Drift, diffusion and stability report at a parameter point.
pub fn assemble(params: &SystemParams) -> Result<(DriftMatrix, DiffusionMatrix, StabilityReport)> {
    let xi = compute_xi(&params.gain)?;
    let k = build_drift(params, &xi)?;
    let r = build_diffusion(params, &xi)?;
    let report = StabilityReport::analyze(&k)?;
    Ok((k, r, report))
}

/// Evaluates the full pipeline at one parameter point.
///
/// Unstable and marginal points stop before the Lyapunov solve. Component
/// failures are returned with the point coordinates attached.
pub fn run_point(params: &SystemParams) -> Result<SweepRow> {
    run_point_at(params, Vec::new())
}

fn run_point_at(params: &SystemParams, coords: Vec<f64>) -> Result<SweepRow> {
    let mut row = SweepRow::empty(coords);
    let (k, r, report) = assemble(params)?;
    row.max_real_eig = report.max_real_eig;
    row.hurwitz_min = report.hurwitz_min();
    row.stable = report.stable_by_eig;

    let omega_ref = params.mirror_1.omega_m.min(params.mirror_2.omega_m);
    match report.verdict(omega_ref) {
        Verdict::Unstable => {
            row.status = Status::Unstable;
            return Ok(row);
        }
        Verdict::Marginal => {
            row.status = Status::Marginal;
            return Ok(row);
        }
        Verdict::Stable => {}
    }

    let kd = k.to_dmatrix();
    let rd = r.to_dmatrix();
    let x = solve_continuous_lyapunov(&kd, &rd)?;
    row.lyapunov_residual = Some(lyapunov_residual(&kd, &x, &rd));
    let cov = CovarianceMatrix(crate::dynamics::Matrix8::from_iterator(x.iter().copied()));
    let v = mech_block(&cov);
    row.covariance = Some(cov);

    let (w1, w2) = (params.mirror_1.omega_m, params.mirror_2.omega_m);
    if w1 == w2 {
        row.energy_diff = Some(mech_energy_diff(&v));
    } else {
        let (e1, e2) = mech_energies(&v, w1, w2);
        row.energy_diff = Some(e1 - e2);
        row.energy_in_joules = true;
    }

    if !r.is_psd() {
        row.status = Status::RNotPsd;
        return Ok(row);
    }
    let g12 = steering_det(&v, Direction::OneToTwo)?;
    let g21 = steering_det(&v, Direction::TwoToOne)?;
    row.steering_1to2 = Some(g12);
    row.steering_2to1 = Some(g21);
    row.regime = Some(classify(g12, g21));
    row.status = Status::Ok;
    Ok(row)
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

/// Evaluates every grid point on `workers` threads (0 = one per core); rows
/// come back in grid order. Failed points carry status `error`.
pub fn run_sweep(base: &SystemParams, spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    with_pool(workers, || {
        grid.into_par_iter()
            .map(|coords| {
                let params = spec.params_at(base, &coords);
                match run_point_at(&params, coords.clone()) {
                    Ok(row) => row,
                    Err(e) => {
                        let e = e.at_point(spec.describe(&coords));
                        log::error!("{e}");
                        let mut row = SweepRow::empty(coords);
                        row.error = Some(e.to_string());
                        row
                    }
                }
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub coords: Vec<f64>,
    /// Hurwitz determinants of the normalized characteristic polynomial.
    pub hurwitz: Vec<f64>,
    pub max_real_eig: f64,
    pub stable_by_eig: bool,
    pub stable_by_rh: bool,
    pub in_boundary_band: bool,
    pub error: Option<String>,
}

pub fn run_stability_map(base: &SystemParams, spec: &SweepSpec, workers: usize) -> Result<Vec<StabilityRow>> {
    spec.validate()?;
    let grid = spec.grid();
    with_pool(workers, || {
        grid.into_par_iter()
            .map(|coords| {
                let params = spec.params_at(base, &coords);
                match assemble(&params) {
                    Ok((_, _, report)) => StabilityRow {
                        coords,
                        in_boundary_band: report.in_boundary_band(),
                        hurwitz: report.hurwitz,
                        max_real_eig: report.max_real_eig,
                        stable_by_eig: report.stable_by_eig,
                        stable_by_rh: report.stable_by_rh,
                        error: None,
                    },
                    Err(e) => {
                        let e = e.at_point(spec.describe(&coords));
                        log::error!("{e}");
                        StabilityRow {
                            coords,
                            hurwitz: vec![f64::NAN; crate::dynamics::DIM],
                            max_real_eig: f64::NAN,
                            stable_by_eig: false,
                            stable_by_rh: false,
                            in_boundary_band: false,
                            error: Some(e.to_string()),
                        }
                    }
                }
            })
            .collect()
    })
}

/// Number in 17-significant-digit scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Writes `# key: value` metadata lines.
pub fn write_metadata<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn sweep_metadata(spec: &SweepSpec, resolved_config: &str, rows: &[SweepRow]) -> Vec<(String, String)> {
    let mut meta = vec![("generator".to_string(), format!("optosteer {}", env!("CARGO_PKG_VERSION")))];
    for (i, a) in spec.axes().iter().enumerate() {
        meta.push((
            format!("axis{}", i + 1),
            format!(
                "{} {} {} n_points={} scale={:?}",
                a.parameter,
                fmt_num(a.min),
                fmt_num(a.max),
                a.n_points,
                a.scale
            )
            .to_lowercase(),
        ));
    }
    meta.extend(point_metadata(resolved_config, rows).into_iter().skip(1));
    meta
}

/// Metadata for rows that are not on a grid.
pub fn point_metadata(resolved_config: &str, rows: &[SweepRow]) -> Vec<(String, String)> {
    let mut meta = vec![("generator".to_string(), format!("optosteer {}", env!("CARGO_PKG_VERSION")))];
    let joules = rows.iter().any(|r| r.energy_in_joules);
    meta.push((
        "energy_diff_unit".into(),
        if joules { "J" } else { "hbar_omega_m/2" }.into(),
    ));
    meta.push(("config".into(), resolved_config.to_string()));
    meta
}

pub fn write_sweep_csv<W: Write>(w: &mut W, spec: &SweepSpec, rows: &[SweepRow], meta: &[(String, String)]) -> Result<()> {
    let axes: Vec<&str> = spec.axes().iter().map(|a| a.parameter.as_str()).collect();
    write_rows_csv(w, &axes, &spec.outputs, rows, meta)
}

/// Writes rows under a header of `axes`, then `stable,status`, then the
/// requested outputs in their canonical order.
pub fn write_rows_csv<W: Write>(
    w: &mut W,
    axes: &[&str],
    outputs: &[OutputColumn],
    rows: &[SweepRow],
    meta: &[(String, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    let mut header: Vec<&str> = axes.to_vec();
    header.push("stable");
    header.push("status");
    let cols: Vec<OutputColumn> = OutputColumn::ALL.into_iter().filter(|c| outputs.contains(c)).collect();
    header.extend(cols.iter().map(|c| c.as_str()));
    writeln!(w, "{}", header.join(","))?;

    for row in rows {
        let mut fields: Vec<String> = row.coords.iter().map(|&v| fmt_num(v)).collect();
        fields.push(row.stable.to_string());
        fields.push(row.status.to_string());
        for c in &cols {
            fields.push(match c {
                OutputColumn::Steering1To2 => opt_num(row.steering_1to2),
                OutputColumn::Steering2To1 => opt_num(row.steering_2to1),
                OutputColumn::Regime => row.regime.map(|r| r.as_str().to_string()).unwrap_or_default(),
                OutputColumn::EnergyDiff => opt_num(row.energy_diff),
                OutputColumn::MaxRealEig => opt_num(Some(row.max_real_eig).filter(|v| !v.is_nan())),
                OutputColumn::HurwitzMin => opt_num(Some(row.hurwitz_min).filter(|v| !v.is_nan())),
                OutputColumn::LyapunovResidual => opt_num(row.lyapunov_residual),
            });
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_stability_csv<W: Write>(
    w: &mut W,
    spec: &SweepSpec,
    rows: &[StabilityRow],
    meta: &[(String, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    let mut header: Vec<String> = spec.axes().iter().map(|a| a.parameter.as_str().to_string()).collect();
    header.extend((1..=crate::dynamics::DIM).map(|i| format!("lambda_{i}")));
    header.extend(["max_real_eig", "stable_by_eig", "stable_by_rh"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let mut fields: Vec<String> = row.coords.iter().map(|&v| fmt_num(v)).collect();
        if row.error.is_some() {
            fields.extend(std::iter::repeat_n(String::new(), crate::dynamics::DIM + 1));
        } else {
            fields.extend(row.hurwitz.iter().map(|&v| fmt_num(v)));
            fields.push(fmt_num(row.max_real_eig));
        }
        fields.push(row.stable_by_eig.to_string());
        fields.push(row.stable_by_rh.to_string());
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_axis_end_points_exact() {
        let a = Axis::linear(ParameterPath::OmegaOverGamma, 0.0, 12.0, 481);
        let v = a.values();
        assert_eq!(v.len(), 481);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[480], 12.0);
        assert!((v[1] - 0.025).abs() < 1e-15);
    }

    #[test]
    fn log_axis() {
        let a = Axis {
            parameter: ParameterPath::NTh,
            min: 1.0,
            max: 100.0,
            n_points: 3,
            scale: Scale::Log,
        };
        let v = a.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_axis_gives_two_rows() {
        let spec = SweepSpec::one_d(Axis::linear(ParameterPath::OmegaOverGamma, 0.0, 0.1, 2));
        let rows = run_sweep(&SystemParams::reference(), &spec, 1).unwrap();
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn one_point_axis_rejected() {
        let spec = SweepSpec::one_d(Axis::linear(ParameterPath::NTh, 0.0, 1.0, 1));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn parameter_paths_round_trip() {
        for p in ParameterPath::ALL {
            assert_eq!(p.as_str().parse::<ParameterPath>().unwrap(), p);
        }
        assert!("gain.linear_gain".parse::<ParameterPath>().is_err());
    }

    #[test]
    fn grid_is_row_major() {
        let spec = SweepSpec::two_d(
            Axis::linear(ParameterPath::OmegaOverGamma, 0.0, 1.0, 2),
            Axis::linear(ParameterPath::NTh, 0.0, 2.0, 3),
        );
        let g = spec.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![0.0, 1.0]);
        assert_eq!(g[3], vec![1.0, 0.0]);
    }

    #[test]
    fn decoupled_point_has_thermal_energy_difference() {
        let mut p = SystemParams::reference();
        p.set_g_over_wm(1, 0.0);
        p.set_g_over_wm(2, 0.0);
        p.set_omega_over_gamma(0.1);
        let row = run_point(&p).unwrap();
        assert_eq!(row.status, Status::Ok);
        assert!((row.energy_diff.unwrap() - 20.0).abs() < 1e-8);
        assert_eq!(row.steering_1to2, Some(0.0));
        assert_eq!(row.steering_2to1, Some(0.0));
    }

    #[test]
    fn unstable_point_has_empty_steering() {
        let p = SystemParams::reference();
        let row = run_point(&p).unwrap();
        if row.status == Status::Unstable {
            assert!(row.steering_1to2.is_none());
            assert!(row.lyapunov_residual.is_none());
            assert!(!row.stable);
        }
    }
}
