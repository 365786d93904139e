//! Model parameters, the dimensional → non-dimensional substitution, and the
//! INI-style run configuration format.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::Axis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("invalid parameter {field}: {value} (must be positive)")]
    NonPositive { field: &'static str, value: f64 },
    #[error("invalid threshold {field}: {value} must lie strictly between 0 and {bound}")]
    Threshold {
        field: &'static str,
        value: f64,
        bound: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: cannot parse `{value}` for key `{key}`")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("config rejected: {0}")]
    Rejected(String),
}

/// Parameters in physical units, prior to scaling.
///
/// Units: diffusivities in length²/time, `lambda_dim`/`beta_dim` in
/// 1/(concentration²·time), `delta_dim` in chem-conc/(cell-conc·time),
/// `alpha_dim` in 1/time, `chi0_dim` in length²/(time·chem-conc).
/// `a_dim` is the peak bacterial concentration of the initial Gaussian and
/// `omega_dim` its width coefficient in 1/length².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalParameters {
    pub du_dim: f64,
    pub dv_dim: f64,
    pub dc_dim: f64,
    pub lambda_dim: f64,
    pub beta_dim: f64,
    pub delta_dim: f64,
    pub alpha_dim: f64,
    pub chi0_dim: f64,
    pub u0: f64,
    pub v0: f64,
    pub c0: f64,
    pub u_star_dim: f64,
    pub v_star_dim: f64,
    pub a_dim: f64,
    pub omega_dim: f64,
}

/// Non-dimensional model parameters, plus the amplitude `a` and width
/// `omega` of the initial Gaussian colony `v(r, 0) = a·exp(-omega·r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub du: f64,
    pub dv: f64,
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub chi0: f64,
    pub u_star: f64,
    pub v_star: f64,
    pub a: f64,
    pub omega: f64,
}

impl Parameters {
    /// The reference parameter set with `Dv = 0` and the single-colony
    /// Gaussian `3·exp(-1000 r²)`.
    pub const fn table1() -> Self {
        Self {
            du: 0.01,
            dv: 0.0,
            lambda: 60.0,
            beta: 8.0,
            delta: 10.0,
            chi0: 3.2,
            u_star: 0.2,
            v_star: 0.5,
            a: 3.0,
            omega: 1000.0,
        }
    }

    /// Lists every violated invariant. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("Du", self.du),
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("delta", self.delta),
            ("chi0", self.chi0),
            ("A", self.a),
            ("omega", self.omega),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                out.push(format!("{name} must be positive (got {value})"));
            }
        }
        if !(self.dv >= 0.0 && self.dv.is_finite()) {
            out.push(format!("Dv must be non-negative (got {})", self.dv));
        }
        for (name, value) in [("u_star", self.u_star), ("v_star", self.v_star)] {
            if !(value > 0.0 && value < 1.0) {
                out.push(format!("{name} not in (0,1) (got {value})"));
            }
        }
        out
    }

    /// Largest diffusion coefficient of the system; the chemical's ½ unless
    /// a species diffuses faster.
    /// Names accepted by [`Parameters::set`], as spelled in config files.
    pub const NAMES: [&'static str; 10] =
        ["Du", "Dv", "lambda", "beta", "delta", "chi0", "u_star", "v_star", "A", "omega"];

    /// Sets the parameter called `name`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        *self.slot(name)? = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64, String> {
        let mut copy = *self;
        Ok(*copy.slot(name)?)
    }

    fn slot(&mut self, name: &str) -> Result<&mut f64, String> {
        Ok(match name {
            "Du" => &mut self.du,
            "Dv" => &mut self.dv,
            "lambda" => &mut self.lambda,
            "beta" => &mut self.beta,
            "delta" => &mut self.delta,
            "chi0" => &mut self.chi0,
            "u_star" => &mut self.u_star,
            "v_star" => &mut self.v_star,
            "A" => &mut self.a,
            "omega" => &mut self.omega,
            other => return Err(format!("unknown parameter `{other}`")),
        })
    }

    pub fn max_diffusivity(&self) -> f64 {
        0.5f64.max(self.du).max(self.dv)
    }
}

impl Default for Parameters {
    fn default() -> Self {
        Self::table1()
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonPositive { field, value })
    }
}

/// Rescales physical parameters to the non-dimensional system.
///
/// Lengths are measured in units of `√(2Dc/α)` and time in units of `1/α`;
/// concentrations are relative to `u0`, `v0`, `c0`.
pub fn nondimensionalize(d: &DimensionalParameters) -> Result<Parameters, ParamError> {
    let fields = [
        ("Du_dim", d.du_dim),
        ("Dv_dim", d.dv_dim),
        ("Dc_dim", d.dc_dim),
        ("lambda_dim", d.lambda_dim),
        ("beta_dim", d.beta_dim),
        ("delta_dim", d.delta_dim),
        ("alpha_dim", d.alpha_dim),
        ("chi0_dim", d.chi0_dim),
        ("u0", d.u0),
        ("v0", d.v0),
        ("c0", d.c0),
        ("u_star_dim", d.u_star_dim),
        ("v_star_dim", d.v_star_dim),
        ("A_dim", d.a_dim),
        ("omega_dim", d.omega_dim),
    ];
    for (field, value) in fields {
        check_positive(field, value)?;
    }
    if d.u_star_dim >= d.u0 {
        return Err(ParamError::Threshold {
            field: "u_star_dim",
            value: d.u_star_dim,
            bound: d.u0,
        });
    }
    if d.v_star_dim >= d.v0 {
        return Err(ParamError::Threshold {
            field: "v_star_dim",
            value: d.v_star_dim,
            bound: d.v0,
        });
    }

    let two_dc = 2.0 * d.dc_dim;
    Ok(Parameters {
        du: d.du_dim / two_dc,
        dv: d.dv_dim / two_dc,
        lambda: d.lambda_dim * d.u0 * d.u0 / d.alpha_dim,
        beta: d.beta_dim * d.v0 * d.v0 / d.alpha_dim,
        delta: d.delta_dim * d.v0 / (d.c0 * d.alpha_dim),
        chi0: d.chi0_dim * d.c0 / two_dc,
        u_star: d.u_star_dim / d.u0,
        v_star: d.v_star_dim / d.v0,
        a: d.a_dim / d.v0,
        // r² scales by 2Dc/α, so the Gaussian exponent picks up the same factor.
        omega: d.omega_dim * two_dc / d.alpha_dim,
    })
}

/// True when a Gaussian colony `a·exp(-omega r²)` settles into a plateau that
/// is non-empty and fits inside the unit-area disk: `1 < a/v* < exp(omega/π)`.
pub fn plateau_condition_holds(a: f64, omega: f64, v_star: f64) -> bool {
    let ratio = a / v_star;
    ratio > 1.0 && ratio < (omega / std::f64::consts::PI).exp()
}

/// Reference experiments with built-in initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Single colony at the centre, invader from a corner, `Dv = 0`.
    T1,
    /// As `T1` with slowly diffusing bacteria, `Dv = 1e-5`.
    T2,
    /// Two colonies on the horizontal midline, uniform invader at 0.21.
    T3,
    /// Centred Gaussian colony built from the configured `A`, `omega`.
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::T1 => "t1",
            Scenario::T2 => "t2",
            Scenario::T3 => "t3",
            Scenario::Custom => "custom",
        }
    }

    /// Bacterial diffusivity the scenario prescribes, if any.
    pub fn dv_override(self) -> Option<f64> {
        match self {
            Scenario::T1 | Scenario::T3 => Some(0.0),
            Scenario::T2 => Some(1e-5),
            Scenario::Custom => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" => Ok(Scenario::T1),
            "t2" => Ok(Scenario::T2),
            "t3" => Ok(Scenario::T3),
            "custom" => Ok(Scenario::Custom),
            other => Err(format!("unknown scenario `{other}`")),
        }
    }
}

/// Line along which a cross-section is sampled: `axis` is the direction of
/// the line, `offset` the fixed coordinate of the other axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSectionSpec {
    pub axis: Axis,
    pub offset: f64,
}

/// Default horizon of the reference experiments.
pub const REFERENCE_T_END: f64 = 9.8039;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Parameters,
    /// Nodes per side.
    pub grid_n: usize,
    /// `Δt = dt_factor · Δx`.
    pub dt_factor: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    pub cross_section: CrossSectionSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: Parameters::table1(),
            grid_n: 128,
            dt_factor: 1e-3,
            t_end: REFERENCE_T_END,
            snapshot_times: Vec::new(),
            scenario: Scenario::T1,
            output_dir: PathBuf::from("out"),
            cross_section: CrossSectionSpec {
                axis: Axis::X,
                offset: 0.5,
            },
        }
    }
}

/// Explicit-scheme stability limit on `D·Δt/Δx²` in two dimensions.
pub const COURANT_LIMIT: f64 = 0.25;

impl RunConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        let mut cfg = Self {
            scenario,
            ..Self::default()
        };
        if let Some(dv) = scenario.dv_override() {
            cfg.params.dv = dv;
        }
        cfg
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.grid_n as f64 - 1.0)
    }

    pub fn dt(&self) -> f64 {
        self.dt_factor * self.dx()
    }

    /// `μ = Δt/Δx²`.
    pub fn courant_number(&self) -> f64 {
        let dx = self.dx();
        self.dt() / (dx * dx)
    }

    /// Checks every structural and parameter invariant, including the
    /// Courant bound against the stiffest diffusivity.
    pub fn check(&self) -> Result<(), ConfigError> {
        let mut problems = self.params.validate();
        if self.grid_n < 16 {
            problems.push(format!("grid_n must be at least 16 (got {})", self.grid_n));
        }
        if !(self.dt_factor > 0.0 && self.dt_factor.is_finite()) {
            problems.push(format!("dt_factor must be positive (got {})", self.dt_factor));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            problems.push(format!("t_end must be non-negative (got {})", self.t_end));
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_end) {
                problems.push(format!("snapshot time {t} outside [0, {}]", self.t_end));
            }
        }
        if !(0.0..=1.0).contains(&self.cross_section.offset) {
            problems.push(format!(
                "cross_section_offset {} outside [0,1]",
                self.cross_section.offset
            ));
        }
        if problems.is_empty() {
            let effective = self.params.max_diffusivity() * self.courant_number();
            if effective > COURANT_LIMIT {
                problems.push(format!(
                    "Courant violation: D·Δt/Δx² = {effective:.4} exceeds {COURANT_LIMIT} (μ = {:.4})",
                    self.courant_number()
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Rejected(problems.join("; ")))
        }
    }

    /// SHA-256 of the serialized configuration, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serialize_config(self).as_bytes()))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Model,
    Grid,
    Run,
    Output,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "model" => Some(Section::Model),
            "grid" => Some(Section::Grid),
            "run" => Some(Section::Run),
            "output" => Some(Section::Output),
            _ => None,
        }
    }
}

const KEYS: &[(Section, &str)] = &[
    (Section::Model, "Du"),
    (Section::Model, "Dv"),
    (Section::Model, "lambda"),
    (Section::Model, "beta"),
    (Section::Model, "delta"),
    (Section::Model, "chi0"),
    (Section::Model, "u_star"),
    (Section::Model, "v_star"),
    (Section::Model, "A"),
    (Section::Model, "omega"),
    (Section::Grid, "grid_n"),
    (Section::Grid, "dt_factor"),
    (Section::Run, "t_end"),
    (Section::Run, "snapshot_times"),
    (Section::Run, "scenario"),
    (Section::Output, "output_dir"),
    (Section::Output, "cross_section_axis"),
    (Section::Output, "cross_section_offset"),
];

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
    })
}

/// Parses a run configuration.
///
/// The format is line oriented: `[section]` headers (`model`, `grid`, `run`,
/// `output`), `key = value` pairs, and full-line comments starting with `#`
/// or `;`. Keys before the first header may come from any section. Missing
/// keys keep their defaults; when `scenario` names a reference experiment and
/// `Dv` is absent, the scenario's `Dv` applies.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section: Option<Section> = None;
    let mut dv_set = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim();
            section = Some(Section::parse(name).ok_or_else(|| ConfigError::UnknownSection {
                line,
                section: name.to_string(),
            })?);
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{trimmed}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let known = KEYS
            .iter()
            .any(|&(s, k)| k == key && section.is_none_or(|cur| cur == s));
        if !known {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }

        match key {
            k if Parameters::NAMES.contains(&k) => {
                let x: f64 = parse_value(line, key, value)?;
                cfg.params.set(k, x).expect("model keys are parameter names");
                dv_set |= k == "Dv";
            }
            "grid_n" => cfg.grid_n = parse_value(line, key, value)?,
            "dt_factor" => cfg.dt_factor = parse_value(line, key, value)?,
            "t_end" => cfg.t_end = parse_value(line, key, value)?,
            "snapshot_times" => {
                cfg.snapshot_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_value(line, key, s))
                    .collect::<Result<_, _>>()?;
            }
            "scenario" => cfg.scenario = parse_value(line, key, value)?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "cross_section_axis" => cfg.cross_section.axis = parse_value(line, key, value)?,
            "cross_section_offset" => cfg.cross_section.offset = parse_value(line, key, value)?,
            _ => unreachable!("key table and match arms disagree on `{key}`"),
        }
    }

    if !dv_set {
        if let Some(dv) = cfg.scenario.dv_override() {
            cfg.params.dv = dv;
        }
    }
    cfg.check()?;
    Ok(cfg)
}

/// Writes a configuration that [`parse_config`] reads back unchanged.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let mut s = String::new();
    let times = cfg
        .snapshot_times
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    // Writing to a String cannot fail.
    let _ = write!(
        s,
        "[model]\nDu = {}\nDv = {}\nlambda = {}\nbeta = {}\ndelta = {}\nchi0 = {}\n\
         u_star = {}\nv_star = {}\nA = {}\nomega = {}\n\n\
         [grid]\ngrid_n = {}\ndt_factor = {}\n\n\
         [run]\nt_end = {}\nsnapshot_times = {}\nscenario = {}\n\n\
         [output]\noutput_dir = {}\ncross_section_axis = {}\ncross_section_offset = {}\n",
        p.du,
        p.dv,
        p.lambda,
        p.beta,
        p.delta,
        p.chi0,
        p.u_star,
        p.v_star,
        p.a,
        p.omega,
        cfg.grid_n,
        cfg.dt_factor,
        cfg.t_end,
        times,
        cfg.scenario,
        cfg.output_dir.display(),
        cfg.cross_section.axis,
        cfg.cross_section.offset,
    );
    s
}
