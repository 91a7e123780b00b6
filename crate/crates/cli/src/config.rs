//! TOML configuration with `--set` overrides.
//!
//! Every section and key has a default, so an empty file (or no file) is a
//! valid configuration. Angles are in degrees here and converted to radians
//! when the core types are built.

use std::path::Path;

use cubli_core::control::{ControlMode, ControllerConfig, DesignSpec};
use cubli_core::plant::{CubliParams, Fidelity, FrictionParams, GravityModel, Plant};
use cubli_core::rotor::{UnitComplex, DEFAULT_SINGULARITY_EPS};
use cubli_core::sim::{Disturbance, Scenario};
use cubli_core::State64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub l: f64,
    pub m_s: f64,
    pub m_w: f64,
    pub i_sg: f64,
    pub i_wg: f64,
    pub g: f64,
}

impl Default for Physics {
    fn default() -> Self {
        let p = CubliParams::<f64>::reference();
        Self {
            l: p.l,
            m_s: p.m_s,
            m_w: p.m_w,
            i_sg: p.i_sg,
            i_wg: p.i_wg,
            g: p.g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Friction {
    pub tau_c: f64,
    pub b_w: f64,
    pub c_d: f64,
}

impl Default for Friction {
    fn default() -> Self {
        let f = FrictionParams::<f64>::reference();
        Self {
            tau_c: f.tau_c,
            b_w: f.b_w,
            c_d: f.c_d,
        }
    }
}

impl Friction {
    fn params(&self) -> FrictionParams<f64> {
        FrictionParams {
            tau_c: self.tau_c,
            b_w: self.b_w,
            c_d: self.c_d,
        }
    }

    fn validate(&self, section: &str) -> Result<(), CliError> {
        nonnegative(&format!("{section}.tau_c"), self.tau_c)?;
        nonnegative(&format!("{section}.b_w"), self.b_w)?;
        nonnegative(&format!("{section}.c_d"), self.c_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gravity {
    PaperLiteral,
    #[default]
    Consistent,
}

impl From<Gravity> for GravityModel {
    fn from(g: Gravity) -> Self {
        match g {
            Gravity::PaperLiteral => GravityModel::PaperLiteral,
            Gravity::Consistent => GravityModel::Consistent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityChoice {
    #[default]
    Exact,
    PaperApprox,
}

impl From<FidelityChoice> for Fidelity {
    fn from(f: FidelityChoice) -> Self {
        match f {
            FidelityChoice::Exact => Fidelity::Exact,
            FidelityChoice::PaperApprox => Fidelity::PaperApprox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AttitudeOnly,
    #[default]
    AttitudeAndWheel,
    SmallAngle,
}

impl From<Mode> for ControlMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::AttitudeOnly => ControlMode::AttitudeOnly,
            Mode::AttitudeAndWheel => ControlMode::AttitudeAndWheel,
            Mode::SmallAngle => ControlMode::SmallAngle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Models {
    pub plant_gravity: Gravity,
    pub controller_gravity: Gravity,
    pub fidelity: FidelityChoice,
    /// Gravity model whose unstable pole scales `design.omega_n_factor`.
    pub omega0_model: Gravity,
}

impl Default for Models {
    fn default() -> Self {
        Self {
            plant_gravity: Gravity::Consistent,
            controller_gravity: Gravity::Consistent,
            fidelity: FidelityChoice::Exact,
            omega0_model: Gravity::PaperLiteral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Design {
    pub zeta: f64,
    /// Natural frequency as a multiple of the open-loop pole.
    pub omega_n_factor: f64,
    pub alpha: f64,
}

impl Default for Design {
    fn default() -> Self {
        Self {
            zeta: std::f64::consts::FRAC_1_SQRT_2,
            omega_n_factor: 1.5,
            alpha: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Controller {
    pub mode: Mode,
    pub singularity_eps: f64,
    /// Friction the controller compensates; the plant's when absent.
    pub friction: Option<Friction>,
}

impl Default for Controller {
    fn default() -> Self {
        Self {
            mode: Mode::default(),
            singularity_eps: DEFAULT_SINGULARITY_EPS,
            friction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceEntry {
    pub start: f64,
    pub duration: f64,
    pub torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub initial_deg: f64,
    pub initial_omega_c: f64,
    pub initial_omega_w: f64,
    pub reference_deg: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sensor_bias_deg: f64,
    pub tau_max: f64,
    pub disturbances: Vec<DisturbanceEntry>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            initial_deg: 40.0,
            initial_omega_c: 0.0,
            initial_omega_w: 0.0,
            reference_deg: 45.0,
            dt: cubli_core::sim::DEFAULT_DT,
            t_end: 20.0,
            sensor_bias_deg: 0.0,
            tau_max: cubli_core::control::DEFAULT_TAU_MAX,
            disturbances: vec![
                DisturbanceEntry {
                    start: 9.0,
                    duration: 0.1,
                    torque: 0.05,
                },
                DisturbanceEntry {
                    start: 16.0,
                    duration: 0.1,
                    torque: 0.05,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    /// CSV destination; `-` writes to stdout.
    pub csv: String,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            csv: "trajectory.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub physics: Physics,
    pub friction: Friction,
    pub models: Models,
    pub design: Design,
    pub controller: Controller,
    pub scenario: ScenarioSection,
    pub output: Output,
}

/// Everything the commands need, in core types.
#[derive(Debug, Clone)]
pub struct Setup {
    pub plant: Plant<f64>,
    pub spec: DesignSpec<f64>,
    pub scenario: Scenario<f64>,
}

fn invalid(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be nonnegative and finite, got {v}"),
        ))
    }
}

fn finite(key: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite, got {v}")))
    }
}

impl Config {
    /// Reads `path` (if any), applies `key=value` overrides and checks
    /// every field.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| CliError::Parse(format!("{}: {}", p.display(), e.message())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Config =
            serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
                let key = e.path().to_string();
                CliError::Config {
                    key,
                    msg: e.into_inner().message().to_string(),
                }
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physics;
        positive("physics.l", p.l)?;
        positive("physics.m_s", p.m_s)?;
        positive("physics.m_w", p.m_w)?;
        positive("physics.i_sg", p.i_sg)?;
        positive("physics.i_wg", p.i_wg)?;
        positive("physics.g", p.g)?;
        self.friction.validate("friction")?;
        if let Some(f) = &self.controller.friction {
            f.validate("controller.friction")?;
        }
        positive(
            "controller.singularity_eps",
            self.controller.singularity_eps,
        )?;
        if self.controller.singularity_eps >= 1.0 {
            return Err(invalid("controller.singularity_eps", "must be below 1"));
        }

        let d = &self.design;
        if !(d.zeta > 0.0 && d.zeta <= 1.0) {
            return Err(invalid(
                "design.zeta",
                format!("must lie in (0, 1], got {}", d.zeta),
            ));
        }
        positive("design.omega_n_factor", d.omega_n_factor)?;
        nonnegative("design.alpha", d.alpha)?;

        let s = &self.scenario;
        finite("scenario.initial_deg", s.initial_deg)?;
        finite("scenario.initial_omega_c", s.initial_omega_c)?;
        finite("scenario.initial_omega_w", s.initial_omega_w)?;
        finite("scenario.reference_deg", s.reference_deg)?;
        finite("scenario.sensor_bias_deg", s.sensor_bias_deg)?;
        positive("scenario.dt", s.dt)?;
        if !(s.t_end.is_finite() && s.t_end >= s.dt) {
            return Err(invalid(
                "scenario.t_end",
                format!("must be at least dt ({}), got {}", s.dt, s.t_end),
            ));
        }
        positive("scenario.tau_max", s.tau_max)?;
        for (i, e) in s.disturbances.iter().enumerate() {
            finite(&format!("scenario.disturbances[{i}].start"), e.start)?;
            positive(&format!("scenario.disturbances[{i}].duration"), e.duration)?;
            finite(&format!("scenario.disturbances[{i}].torque"), e.torque)?;
        }
        if self.output.csv.is_empty() {
            return Err(invalid("output.csv", "must not be empty"));
        }
        // cross-field checks live in the core constructors
        self.setup().map(|_| ())
    }

    pub fn params(&self) -> CubliParams<f64> {
        let p = &self.physics;
        CubliParams {
            l: p.l,
            m_s: p.m_s,
            m_w: p.m_w,
            i_sg: p.i_sg,
            i_wg: p.i_wg,
            g: p.g,
        }
    }

    pub fn setup(&self) -> Result<Setup, CliError> {
        let derived = self
            .params()
            .derive()
            .map_err(|e| invalid("physics", e.to_string()))?;
        let plant = Plant::new(
            derived,
            self.friction.params(),
            self.models.plant_gravity.into(),
            self.models.fidelity.into(),
        )
        .map_err(|e| invalid("models.fidelity", e.to_string()))?;
        let omega_n = self.design.omega_n_factor * derived.omega0(self.models.omega0_model.into());
        let spec = DesignSpec::new(self.design.zeta, omega_n, self.design.alpha)
            .map_err(|e| invalid("design", e.to_string()))?;

        let s = &self.scenario;
        let initial = State64 {
            q: UnitComplex::from_angle(s.initial_deg.to_radians()),
            theta_w: 0.0,
            omega_c: s.initial_omega_c,
            omega_w: s.initial_omega_w,
        };
        let controller = ControllerConfig {
            mode: self.controller.mode.into(),
            tau_max: s.tau_max,
            gravity: self.models.controller_gravity.into(),
            reference: UnitComplex::from_angle(s.reference_deg.to_radians()),
            eps: self.controller.singularity_eps,
        };
        let scenario = Scenario {
            initial,
            plant,
            controller,
            spec,
            controller_friction: self.controller.friction.unwrap_or(self.friction).params(),
            dt: s.dt,
            t_end: s.t_end,
            disturbances: s
                .disturbances
                .iter()
                .map(|d| Disturbance {
                    start: d.start,
                    duration: d.duration,
                    torque: d.torque,
                })
                .collect(),
            sensor_bias: s.sensor_bias_deg.to_radians(),
        };
        scenario
            .validate()
            .map_err(|e| invalid("scenario", e.to_string()))?;
        Ok(Setup {
            plant,
            spec,
            scenario,
        })
    }
}

/// Applies one `dotted.key=value` override. The value is read as a TOML
/// value, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Parse(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Parse(format!(
            "override key `{key}` is malformed"
        )));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));

    let (last, parents) = parts.split_last().unwrap();
    let mut node = table;
    for (depth, part) in parents.iter().enumerate() {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| CliError::Config {
            key: parts[..=depth].join("."),
            msg: "is not a table".into(),
        })?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}
