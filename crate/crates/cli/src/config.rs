//! Run configuration: JSON schema, named presets, and grid resolution.
//!
//! All numeric inputs are ratios to the mechanical frequency. A config either
//! gives the linearized couplings directly (`mode = "linear"`, the default
//! input path) or the bare couplings plus drive (`mode = "physical"`, routed
//! through the classical steady state).

use hybridoptomech::experiments::Axis;
use hybridoptomech::model::{LinearParams, PhysicalParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Configuration loading and validation errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    ParseError(String),
    #[error("config contains an unknown key: {0}")]
    UnknownKey(String),
    #[error("missing field `{0}` required by this mode or command")]
    MissingField(&'static str),
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("unknown preset `{0}` (expected fig3, fig4a..fig4d, fig5a, fig5b)")]
    UnknownPreset(String),
}

/// Whether couplings are given linearized (g, λ, μ) or bare (g0, μ0, η, φ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Linear,
    Physical,
}

fn default_omega_m() -> f64 {
    1.0
}

/// Parameter record; frequency-like entries are in units of ω_m.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRecord {
    #[serde(default = "default_omega_m")]
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_m: f64,
    pub nbar: f64,
    #[serde(default)]
    pub delta_c: f64,
    #[serde(default)]
    pub delta_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Dopant coupling ratio μ/λ for resonant maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_over_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

/// Axis spacing for grid specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One grid axis; several entries with the same name concatenate, which is
/// how split ranges (e.g. the two sideband branches) are expressed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

/// Output format of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Plotdata,
}

impl Format {
    pub fn from_name(name: &str) -> Option<Format> {
        match name {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "plotdata" => Some(Format::Plotdata),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// A full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: ParamRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<GridSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strategies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    /// Parse a JSON config, classifying unknown-key failures separately.
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        match serde_json::from_str::<RunConfig>(text) {
            Ok(cfg) => cfg.validated(),
            Err(e) => {
                let msg = e.to_string();
                if msg.contains("unknown field") {
                    Err(ConfigError::UnknownKey(msg))
                } else {
                    Err(ConfigError::ParseError(msg))
                }
            }
        }
    }

    /// Load and validate a JSON config file.
    pub fn load_file(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::ParseError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Load a named preset.
    pub fn load_preset(name: &str) -> Result<RunConfig, ConfigError> {
        preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
    }

    fn validated(self) -> Result<RunConfig, ConfigError> {
        let p = &self.params;
        for (name, value) in [
            ("omega_m", p.omega_m),
            ("kappa", p.kappa),
            ("gamma", p.gamma),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ConfigError::BadRange(format!(
                    "`{name}` must be positive and finite, got {value}"
                )));
            }
        }
        for (name, value) in [("gamma_m", p.gamma_m), ("nbar", p.nbar)] {
            if !value.is_finite() || value < 0.0 {
                return Err(ConfigError::BadRange(format!(
                    "`{name}` must be non-negative, got {value}"
                )));
            }
        }
        for spec in &self.grids {
            spec.validate()?;
        }
        for s in &self.strategies {
            if hybridoptomech::experiments::Strategy::from_name(s).is_none() && s != "all" {
                return Err(ConfigError::BadRange(format!("unknown strategy `{s}`")));
            }
        }
        Ok(self)
    }

    /// Linearized parameters (mode = linear), normalized to ω_m = 1.
    pub fn to_linear(&self) -> Result<LinearParams, ConfigError> {
        if self.mode != Mode::Linear {
            return Err(ConfigError::BadRange(
                "command path requires mode = \"linear\"".into(),
            ));
        }
        let p = &self.params;
        let w = p.omega_m;
        let lin = LinearParams {
            g: p.g.ok_or(ConfigError::MissingField("g"))? / w,
            lambda: p.lambda.ok_or(ConfigError::MissingField("lambda"))? / w,
            mu: p.mu.ok_or(ConfigError::MissingField("mu"))? / w,
            delta_c: p.delta_c / w,
            delta_a: p.delta_a / w,
            kappa: p.kappa / w,
            gamma: p.gamma / w,
            gamma_m: p.gamma_m / w,
            nbar: p.nbar,
            omega_m: 1.0,
        };
        lin.validated()
            .map_err(|e| ConfigError::BadRange(e.to_string()))
    }

    /// Base parameters for sweeps that set their own couplings per cell.
    pub fn to_base(&self) -> Result<LinearParams, ConfigError> {
        let p = &self.params;
        let w = p.omega_m;
        let lin = LinearParams {
            g: p.g.unwrap_or(0.0) / w,
            lambda: p.lambda.unwrap_or(0.0) / w,
            mu: p.mu.unwrap_or(0.0) / w,
            delta_c: p.delta_c / w,
            delta_a: p.delta_a / w,
            kappa: p.kappa / w,
            gamma: p.gamma / w,
            gamma_m: p.gamma_m / w,
            nbar: p.nbar,
            omega_m: 1.0,
        };
        lin.validated()
            .map_err(|e| ConfigError::BadRange(e.to_string()))
    }

    /// Full nonlinear parameters (mode = physical).
    pub fn to_physical(&self) -> Result<PhysicalParams, ConfigError> {
        if self.mode != Mode::Physical {
            return Err(ConfigError::BadRange(
                "command path requires mode = \"physical\" with drive fields".into(),
            ));
        }
        let p = &self.params;
        Ok(PhysicalParams {
            omega_m: p.omega_m,
            gamma_m: p.gamma_m,
            nbar: p.nbar,
            kappa: p.kappa,
            gamma: p.gamma,
            delta_c: p.delta_c,
            delta_a: p.delta_a,
            g0: p.g0.ok_or(ConfigError::MissingField("g0"))?,
            lambda: p.lambda.ok_or(ConfigError::MissingField("lambda"))?,
            mu0: p.mu0.ok_or(ConfigError::MissingField("mu0"))?,
            eta: p.eta.ok_or(ConfigError::MissingField("eta"))?,
            phi: p.phi.unwrap_or(0.0),
        })
    }
}

/// Grid specs for the axis `name`: all matching entries of the config, or
/// the command default when none matches.
pub fn grid_specs(config: &RunConfig, name: &str, default: &[GridSpec]) -> Vec<GridSpec> {
    let matching: Vec<GridSpec> = config
        .grids
        .iter()
        .filter(|g| g.name == name)
        .cloned()
        .collect();
    if matching.is_empty() {
        default.to_vec()
    } else {
        matching
    }
}

/// Concatenate grid specs (in order) into one explicit axis.
pub fn axis_from_specs(name: &str, specs: &[GridSpec]) -> Result<Axis, ConfigError> {
    let mut values = Vec::new();
    for spec in specs {
        values.extend(spec.to_axis()?.values);
    }
    Ok(Axis {
        name: name.to_string(),
        values,
    })
}

impl GridSpec {
    pub fn new(name: &str, min: f64, max: f64, points: usize, spacing: Spacing) -> GridSpec {
        GridSpec {
            name: name.to_string(),
            min,
            max,
            points,
            spacing,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(ConfigError::BadRange(format!(
                "grid `{}`: invalid range [{}, {}]",
                self.name, self.min, self.max
            )));
        }
        if self.points == 0 {
            return Err(ConfigError::BadRange(format!(
                "grid `{}`: zero points",
                self.name
            )));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(ConfigError::BadRange(format!(
                "grid `{}`: log spacing requires min > 0",
                self.name
            )));
        }
        Ok(())
    }

    pub fn to_axis(&self) -> Result<Axis, ConfigError> {
        self.validate()?;
        Ok(match self.spacing {
            Spacing::Linear => Axis::linear(&self.name, self.min, self.max, self.points),
            Spacing::Log => Axis::log(&self.name, self.min, self.max, self.points),
        })
    }

    /// Parse a CLI override `name=min:max:points[:log|:linear]`.
    pub fn parse_flag(flag: &str) -> Result<GridSpec, ConfigError> {
        let (name, rest) = flag.split_once('=').ok_or_else(|| {
            ConfigError::BadRange(format!(
                "grid flag `{flag}`: expected name=min:max:points[:log]"
            ))
        })?;
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(ConfigError::BadRange(format!(
                "grid flag `{flag}`: expected min:max:points[:log]"
            )));
        }
        let parse_f = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| ConfigError::BadRange(format!("grid flag `{flag}`: bad number `{s}`")))
        };
        let min = parse_f(parts[0])?;
        let max = parse_f(parts[1])?;
        let points = parts[2]
            .parse::<usize>()
            .map_err(|_| ConfigError::BadRange(format!("grid flag `{flag}`: bad point count")))?;
        let spacing = match parts.get(3) {
            None | Some(&"linear") => Spacing::Linear,
            Some(&"log") => Spacing::Log,
            Some(other) => {
                return Err(ConfigError::BadRange(format!(
                    "grid flag `{flag}`: unknown spacing `{other}`"
                )))
            }
        };
        let spec = GridSpec::new(name, min, max, points, spacing);
        spec.validate()?;
        Ok(spec)
    }
}

/// Default detuning-map grids (201×201 over Δ_c ∈ [−40, 40], Δ_a ∈ [−6, 6]).
pub fn default_map_grids() -> (Vec<GridSpec>, Vec<GridSpec>) {
    (
        vec![GridSpec::new("delta_c", -40.0, 40.0, 201, Spacing::Linear)],
        vec![GridSpec::new("delta_a", -6.0, 6.0, 201, Spacing::Linear)],
    )
}

/// Default line-scan grid: both sideband branches, 400 points each, with the
/// guard band around Δ_c = ω_m excluded.
pub fn default_line_grids() -> Vec<GridSpec> {
    vec![
        GridSpec::new("delta_c", -120.0, -1.001, 400, Spacing::Linear),
        GridSpec::new("delta_c", 1.001, 120.0, 400, Spacing::Linear),
    ]
}

/// Default resonant-map grids (λ ∈ [0.1, 20] linear, g ∈ [0.01, 2] log).
pub fn default_resonant_grids() -> (Vec<GridSpec>, Vec<GridSpec>) {
    (
        vec![GridSpec::new("lambda", 0.1, 20.0, 150, Spacing::Linear)],
        vec![GridSpec::new("g", 0.01, 2.0, 150, Spacing::Log)],
    )
}

/// Default spectrum window ω ∈ [−2, 2], 801 points.
pub fn default_omega_grid() -> Vec<GridSpec> {
    vec![GridSpec::new("omega", -2.0, 2.0, 801, Spacing::Linear)]
}

fn record(kappa: f64, gamma: f64, g: f64, lambda: f64, mu: f64) -> ParamRecord {
    ParamRecord {
        omega_m: 1.0,
        kappa,
        gamma,
        gamma_m: 1e-6,
        nbar: 1e3,
        delta_c: 0.0,
        delta_a: 0.0,
        g: Some(g),
        lambda: Some(lambda),
        mu: Some(mu),
        mu_over_lambda: None,
        g0: None,
        mu0: None,
        eta: None,
        phi: None,
    }
}

/// Named presets carrying the reference parameter sets.
pub fn preset(name: &str) -> Option<RunConfig> {
    let cfg = match name {
        "fig3" => {
            let mut params = record(20.0, 0.8, 0.25, 8.0, 0.01);
            // Single-point commands default to the optimum of the default
            // line scan (upper sideband branch).
            params.delta_c = -38.877874686716794;
            params.delta_a = -0.604_899_972_799_157_8;
            let (dc, da) = default_map_grids();
            RunConfig {
                mode: Mode::Linear,
                params,
                grids: dc.into_iter().chain(da).collect(),
                strategies: vec!["all".into()],
                output: None,
            }
        }
        "fig4a" => RunConfig {
            mode: Mode::Linear,
            params: record(20.0, 0.8, 0.25, 8.0, 0.01),
            grids: Vec::new(),
            strategies: vec!["all".into()],
            output: None,
        },
        "fig4b" => RunConfig {
            mode: Mode::Linear,
            params: record(80.0, 2.0, 0.06, 15.0, 0.006),
            grids: Vec::new(),
            strategies: vec!["all".into()],
            output: None,
        },
        "fig4c" => RunConfig {
            mode: Mode::Linear,
            params: record(80.0, 0.1, 0.3, 8.0, 0.005),
            grids: Vec::new(),
            strategies: vec!["all".into()],
            output: None,
        },
        "fig4d" => RunConfig {
            mode: Mode::Linear,
            params: record(0.8, 10.0, 0.1, 12.0, 0.025),
            grids: Vec::new(),
            strategies: vec!["all".into()],
            output: None,
        },
        "fig5a" | "fig5b" => {
            let (kappa, gamma) = if name == "fig5a" {
                (2.7, 0.8)
            } else {
                (0.7, 0.5)
            };
            let mut params = record(kappa, gamma, 0.0, 0.0, 0.0);
            params.g = None;
            params.lambda = None;
            params.mu = None;
            params.mu_over_lambda = Some(0.05);
            let (lam, g) = default_resonant_grids();
            RunConfig {
                mode: Mode::Linear,
                params,
                grids: lam.into_iter().chain(g).collect(),
                strategies: Vec::new(),
                output: None,
            }
        }
        _ => return None,
    };
    Some(cfg)
}
