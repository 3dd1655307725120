//! Run configuration: JSON schema and conversion to library problems.

use std::path::PathBuf;

use serde::Deserialize;

use selfadj::model::{
    to_internal_units, BoundaryCondition, Domain1D, ExtendedReal, KineticWeight, PointInteraction, PotentialFamily, PotentialSpec, Problem, Robin,
    SingularTail, TabulatedPotential, U2Params, Units,
};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub command: CommandName,
    #[serde(default)]
    pub classify: Option<ClassifyParams>,
    #[serde(default)]
    pub refmodes: Option<RefmodesParams>,
    #[serde(default)]
    pub bound: Option<BoundParams>,
    #[serde(default)]
    pub scatter: Option<ScatterParams>,
    #[serde(default)]
    pub evolve: Option<EvolveParams>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Classify,
    Refmodes,
    Bound,
    Scatter,
    Evolve,
}

impl CommandName {
    pub fn name(self) -> &'static str {
        match self {
            CommandName::Classify => "classify",
            CommandName::Refmodes => "refmodes",
            CommandName::Bound => "bound",
            CommandName::Scatter => "scatter",
            CommandName::Evolve => "evolve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { format: Format::Csv, path: None, precision: default_precision() }
    }
}

fn default_precision() -> usize {
    12
}

/// A length that may be infinite, written as a number or "inf".
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Finite(f64),
    Named(Infinity),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf", alias = "infinity", alias = "Infinity")]
    Inf,
}

impl Length {
    fn value(self) -> ExtendedReal {
        match self {
            Length::Finite(l) => ExtendedReal::Finite(l),
            Length::Named(_) => ExtendedReal::Infinite,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainConfig,
    pub potential: PotentialConfig,
    pub bc: BcConfig,
    #[serde(default)]
    pub units: Option<UnitsConfig>,
    #[serde(default)]
    pub e0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    HalfLine,
    Line,
    Interval { a: f64, b: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: FamilyName,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    #[serde(default)]
    pub weight: Option<WeightConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Free,
    InverseSquare,
    Coulomb,
    CoulombCentrifugal,
    PowerLaw,
    Tabulated,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InverseSquareParams {
    c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoulombParams {
    g: f64,
    #[serde(default)]
    l: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerLawParams {
    coefficient: f64,
    exponent: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedParams {
    x: Vec<f64>,
    v: Vec<f64>,
    #[serde(default)]
    tail: Option<TailConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailConfig {
    Power { exponents: [f64; 2] },
    Coulomb { g: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    Unit,
    PowerLaw { coefficient: f64, exponent: f64 },
    Tabulated { x: Vec<f64>, p: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum BcConfig {
    Robin(RobinConfig),
    U2(U2Config),
    IntervalRobin { lower: RobinConfig, upper: RobinConfig },
    Intrinsic,
}

/// Robin condition by length L or by angle ϑ, with scale L0 (default 1).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobinConfig {
    #[serde(default)]
    pub length: Option<Length>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_l0")]
    pub l0: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum U2Config {
    Lengths {
        l_plus: Length,
        l_minus: Length,
        #[serde(default)]
        mixing: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default = "default_l0")]
        l0: f64,
    },
    Angles {
        theta_plus: f64,
        theta_minus: f64,
        #[serde(default)]
        mixing: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default = "default_l0")]
        l0: f64,
    },
    Transparent {
        #[serde(default = "default_l0")]
        l0: f64,
    },
    Delta {
        alpha: f64,
        #[serde(default = "default_l0")]
        l0: f64,
    },
}

fn default_l0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub hbar: f64,
    pub mass: f64,
}

/// Grid {start, stop, count, scale}.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Sweep {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.count == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config("sweep needs finite start/stop and count >= 1"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::config("log sweep needs positive start and stop"));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect())
    }
}

/// Boundary parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Half-line Robin length L.
    Length,
    /// Half-line Robin angle ϑ.
    Theta,
    LPlus,
    LMinus,
    Mixing,
    Phase,
    Alpha,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Length => "L",
            SweepParameter::Theta => "theta",
            SweepParameter::LPlus => "L_plus",
            SweepParameter::LMinus => "L_minus",
            SweepParameter::Mixing => "mixing",
            SweepParameter::Phase => "phase",
            SweepParameter::Alpha => "alpha",
        }
    }
}

/// Sweep of one boundary parameter over {start, stop, count, scale}.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl ParameterSweep {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        Sweep { start: self.start, stop: self.stop, count: self.count, scale: self.scale }.values()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    #[serde(default)]
    pub e0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointName {
    #[default]
    Lower,
    Upper,
    MarkedPlus,
    MarkedMinus,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefmodesParams {
    #[serde(default)]
    pub endpoint: EndpointName,
    #[serde(default)]
    pub e0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    #[default]
    Auto,
    Shooting,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub e_min: f64,
    pub e_max: f64,
    #[serde(default = "default_max_states")]
    pub max_states: usize,
    #[serde(default)]
    pub backend: BackendChoice,
    #[serde(default)]
    pub sweep: Option<ParameterSweep>,
    /// CSV destination for (n, x, ψ) samples of every state.
    #[serde(default)]
    pub eigenfunctions: Option<PathBuf>,
}

fn default_max_states() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterParams {
    pub k: Sweep,
    #[serde(default)]
    pub sweep: Option<ParameterSweep>,
    /// Append the filter class of each |t|²(k) curve (line only).
    #[serde(default)]
    pub filter: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    pub h: f64,
    pub x_max: f64,
    pub dt: f64,
    pub t_total: f64,
    #[serde(default = "default_frames")]
    pub frames: usize,
    /// Measure the reflection delay of the packet (half line only).
    #[serde(default)]
    pub measure_delay: bool,
    /// JSON summary destination for CSV runs.
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

fn default_frames() -> usize {
    20
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if cfg.output.precision == 0 || cfg.output.precision > 17 {
            return Err(CliError::config("output precision must be between 1 and 17"));
        }
        Ok(cfg)
    }
}

fn robin(r: &RobinConfig) -> Result<Robin, CliError> {
    let out = match (r.length, r.theta) {
        (Some(l), None) => Robin::from_length(l.value(), r.l0),
        (None, Some(t)) => Robin::from_theta(t, r.l0),
        _ => return Err(CliError::config("robin condition needs exactly one of `length` or `theta`")),
    };
    out.map_err(CliError::problem)
}

fn point_interaction(u: &U2Config) -> Result<PointInteraction, CliError> {
    let out = match *u {
        U2Config::Lengths { l_plus, l_minus, mixing, phase, l0 } => {
            PointInteraction::from_lengths(l_plus.value(), l_minus.value(), mixing, phase, l0)
        }
        U2Config::Angles { theta_plus, theta_minus, mixing, phase, l0 } => {
            PointInteraction::from_params(U2Params { theta_plus, theta_minus, mixing, phase }, l0)
        }
        U2Config::Transparent { l0 } => PointInteraction::transparent(l0),
        U2Config::Delta { alpha, l0 } => PointInteraction::delta(alpha, l0),
    };
    out.map_err(CliError::problem)
}

impl ProblemConfig {
    fn params<T: serde::de::DeserializeOwned>(&self) -> Result<T, CliError> {
        let v = self.potential.params.clone().unwrap_or(serde_json::Value::Null);
        serde_json::from_value(v).map_err(|e| CliError::config(format!("potential.params: {e}")))
    }

    pub fn units(&self) -> Result<Units, CliError> {
        match self.units {
            Some(u) => Units::new(u.hbar, u.mass).map_err(CliError::problem),
            None => Ok(Units::internal()),
        }
    }

    /// The problem in internal units.
    pub fn build(&self) -> Result<Problem, CliError> {
        let domain = match self.domain {
            DomainConfig::HalfLine => Domain1D::half_line(),
            DomainConfig::Line => Domain1D::line(),
            DomainConfig::Interval { a, b } => Domain1D::interval(a, b).map_err(CliError::problem)?,
        };
        let family = match self.potential.family {
            FamilyName::Free => {
                if self.potential.params.as_ref().is_some_and(|v| !v.is_null() && v != &serde_json::json!({})) {
                    return Err(CliError::config("family `free` takes no params"));
                }
                PotentialFamily::Free
            }
            FamilyName::InverseSquare => PotentialFamily::InverseSquare { c: self.params::<InverseSquareParams>()?.c },
            FamilyName::Coulomb => {
                let p: CoulombParams = self.params()?;
                if p.l != 0 {
                    return Err(CliError::config("family `coulomb` takes no `l`; use `coulomb_centrifugal`"));
                }
                PotentialFamily::Coulomb { g: p.g }
            }
            FamilyName::CoulombCentrifugal => {
                let p: CoulombParams = self.params()?;
                PotentialFamily::CoulombPlusCentrifugal { g: p.g, l: p.l }
            }
            FamilyName::PowerLaw => {
                let p: PowerLawParams = self.params()?;
                PotentialFamily::PowerLaw { coefficient: p.coefficient, exponent: p.exponent }
            }
            FamilyName::Tabulated => {
                let p: TabulatedParams = self.params()?;
                let tail = p.tail.map(|t| match t {
                    TailConfig::Power { exponents } => SingularTail::Power { exponents },
                    TailConfig::Coulomb { g } => SingularTail::Coulomb { g },
                });
                PotentialFamily::Tabulated(TabulatedPotential::new(p.x, p.v, tail).map_err(CliError::problem)?)
            }
        };
        let weight = match &self.potential.weight {
            None | Some(WeightConfig::Unit) => KineticWeight::Unit,
            Some(WeightConfig::PowerLaw { coefficient, exponent }) => KineticWeight::PowerLaw { coefficient: *coefficient, exponent: *exponent },
            Some(WeightConfig::Tabulated { x, p }) => KineticWeight::Tabulated { x: x.clone(), p: p.clone() },
        };
        let potential = PotentialSpec::new(family, weight).map_err(CliError::problem)?;
        let bc = match &self.bc {
            BcConfig::Robin(r) => BoundaryCondition::HalfLineRobin(robin(r)?),
            BcConfig::U2(u) => BoundaryCondition::LineU2(point_interaction(u)?),
            BcConfig::IntervalRobin { lower, upper } => BoundaryCondition::IntervalRobin { lower: robin(lower)?, upper: robin(upper)? },
            BcConfig::Intrinsic => BoundaryCondition::Intrinsic,
        };
        let units = self.units()?;
        let problem = Problem::new(domain, potential, bc).and_then(|p| p.with_e0(self.e0)).map_err(CliError::problem)?;
        to_internal_units(&problem, &units).map_err(CliError::problem)
    }

    /// Copy with one boundary parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self, CliError> {
        let mut out = self.clone();
        let mismatch = || CliError::config(format!("sweep parameter `{}` does not apply to this boundary condition", parameter.name()));
        match (&mut out.bc, parameter) {
            (BcConfig::Robin(r), SweepParameter::Length) => {
                r.length = Some(Length::Finite(value));
                r.theta = None;
            }
            (BcConfig::Robin(r), SweepParameter::Theta) => {
                r.theta = Some(value);
                r.length = None;
            }
            (BcConfig::U2(U2Config::Lengths { l_plus, .. }), SweepParameter::LPlus) => *l_plus = Length::Finite(value),
            (BcConfig::U2(U2Config::Lengths { l_minus, .. }), SweepParameter::LMinus) => *l_minus = Length::Finite(value),
            (BcConfig::U2(U2Config::Lengths { mixing, .. } | U2Config::Angles { mixing, .. }), SweepParameter::Mixing) => *mixing = value,
            (BcConfig::U2(U2Config::Lengths { phase, .. } | U2Config::Angles { phase, .. }), SweepParameter::Phase) => *phase = value,
            (BcConfig::U2(U2Config::Delta { alpha, .. }), SweepParameter::Alpha) => *alpha = value,
            _ => return Err(mismatch()),
        }
        Ok(out)
    }
}
